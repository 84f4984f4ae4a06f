#include "bevx/scene.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bevx/error.hpp"

namespace bevx {

using nlohmann::json;

namespace {

template <std::size_t N>
std::array<double, N> numbers(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != N) {
    throw FormatError(std::string("field '") + key + "' must be an array of " + std::to_string(N) +
                      " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = v[i].get<double>();
  return out;
}

std::size_t count_field(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() <= 0) {
    throw FormatError(std::string("field '") + key + "' must be a positive integer");
  }
  return v.get<std::size_t>();
}

Scene from_json(const json& doc) {
  std::vector<Camera> cameras;
  for (const json& c : doc.at("cameras")) {
    cameras.push_back(Camera{numbers<9>(c, "intrinsics"), numbers<9>(c, "rotation"),
                             numbers<3>(c, "translation")});
  }
  CameraRig rig(std::move(cameras), count_field(doc, "feature_width"),
                count_field(doc, "feature_height"), doc.at("image_stride").get<double>());
  Scene scene{std::move(rig), {}, {}, std::nullopt, 16};
  const json& depth = doc.at("depth");
  scene.depth = {depth.at("min").get<double>(), depth.at("max").get<double>(),
                 count_field(depth, "count")};
  const json& bev = doc.at("bev");
  scene.bev = {bev.at("extent").get<double>(), count_field(bev, "h_cells"),
               count_field(bev, "w_cells")};
  if (doc.contains("reference_row")) {
    scene.reference_row = doc.at("reference_row").get<std::size_t>();
    if (*scene.reference_row >= scene.rig.feature_height()) {
      throw FormatError("reference_row must be below feature_height");
    }
  }
  if (doc.contains("channels")) scene.channels = count_field(doc, "channels");
  // Fail early on invalid ranges.
  scene.bins();
  scene.grid();
  return scene;
}

}  // namespace

Scene parse_scene(const std::string& json_text) {
  try {
    return from_json(json::parse(json_text));
  } catch (const json::exception& e) {
    throw FormatError(std::string("scene config: ") + e.what());
  } catch (const GeometryError& e) {
    throw FormatError(std::string("scene config: ") + e.what());
  } catch (const ValidationError& e) {
    throw FormatError(std::string("scene config: ") + e.what());
  }
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str());
}

std::string dump_scene(const Scene& scene) {
  json doc;
  json cams = json::array();
  for (const Camera& c : scene.rig.cameras()) {
    cams.push_back({{"intrinsics", c.intrinsics}, {"rotation", c.rotation}, {"translation", c.translation}});
  }
  doc["cameras"] = cams;
  doc["feature_width"] = scene.rig.feature_width();
  doc["feature_height"] = scene.rig.feature_height();
  doc["image_stride"] = scene.rig.image_stride();
  doc["depth"] = {{"min", scene.depth.min}, {"max", scene.depth.max}, {"count", scene.depth.count}};
  doc["bev"] = {{"extent", scene.bev.extent}, {"h_cells", scene.bev.h_cells}, {"w_cells", scene.bev.w_cells}};
  if (scene.reference_row) doc["reference_row"] = *scene.reference_row;
  doc["channels"] = scene.channels;
  return doc.dump(2);
}

std::uint64_t scene_hash(const Scene& scene) {
  Scene keyed = scene;
  // Channels do not affect the matrices.
  keyed.channels = 0;
  keyed.reference_row = scene.row();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : dump_scene(keyed)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace bevx
