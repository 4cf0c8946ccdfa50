#include "selfmap/sensors.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "selfmap/rng.hpp"

namespace selfmap {

VecX sense_position(const EndEffectorConfig& c) { return c.position; }

VecX PositionSensor::sense(const EndEffectorConfig& c) const {
  return sense_position(c);
}

std::optional<double> project_source(const Vec2& source,
                                     const EndEffectorConfig& retina_center,
                                     const RetinaGeometry& geom) {
  const Vec2 axis{std::cos(geom.orientation), std::sin(geom.orientation)};
  const Vec2 lateral{-axis.y(), axis.x()};
  const Vec2 lens = retina_center.position + geom.lens_offset * axis;

  const Vec2 rel = source - lens;
  const double a = rel.dot(axis);  // axial distance in front of the lens
  if (a <= 0.0) return std::nullopt;
  const double l = rel.dot(lateral);
  // Pinhole similar triangles: image forms lens_offset behind the lens,
  // inverted.
  return -geom.lens_offset * l / a;
}

VecX sense_retina(const EndEffectorConfig& c, const Environment& env,
                  const RetinaGeometry& geom) {
  const Vec2 axis{std::cos(geom.orientation), std::sin(geom.orientation)};
  const Vec2 lens = c.position + geom.lens_offset * axis;

  VecX s = VecX::Zero(kRetinaDim);
  for (const LightSource& src : env.sources) {
    const auto y_proj = project_source(src.position, c, geom);
    if (!y_proj) continue;
    const double dist = (src.position - lens).norm();
    const int base = src.color == LightColor::Red ? 0 : 3;
    for (int k = 0; k < 3; ++k) {
      const double d = *y_proj - geom.photoreceptor_offsets[k];
      s[base + k] += std::exp(-d * d) / dist;
    }
  }
  return s;
}

VecX RetinaSensor::sense(const EndEffectorConfig& c) const {
  return sense_retina(c, env_, geom_);
}

Environment generate_environment(std::uint64_t seed, int n_red, int n_blue,
                                 const EnvironmentBounds& bounds,
                                 const ArmGeometry& arm) {
  if (n_red < 1 || n_blue < 1)
    throw std::invalid_argument(
        "environment needs at least one source of each color");
  if (bounds.x_min >= bounds.x_max || bounds.y_min >= bounds.y_max)
    throw std::invalid_argument("empty environment bounds");

  // Closest point of the bounds rectangle to the arm base must lie outside
  // the reachable disk of radius 3L.
  const double cx =
      std::clamp(arm.base.x(), bounds.x_min, bounds.x_max) - arm.base.x();
  const double cy =
      std::clamp(arm.base.y(), bounds.y_min, bounds.y_max) - arm.base.y();
  if (std::hypot(cx, cy) <= 3.0 * arm.segment_length)
    throw std::invalid_argument(
        "environment bounds intersect the arm's reachable disk");

  Rng rng(seed);
  Environment env;
  env.sources.reserve(static_cast<std::size_t>(n_red + n_blue));
  for (int i = 0; i < n_red + n_blue; ++i) {
    LightSource src;
    src.position.x() = rng.uniform(bounds.x_min, bounds.x_max);
    src.position.y() = rng.uniform(bounds.y_min, bounds.y_max);
    src.color = i < n_red ? LightColor::Red : LightColor::Blue;
    env.sources.push_back(src);
  }
  return env;
}

std::string environment_to_json(const Environment& env) {
  nlohmann::json sources = nlohmann::json::array();
  for (const LightSource& src : env.sources) {
    sources.push_back({{"x", src.position.x()},
                       {"y", src.position.y()},
                       {"color", src.color == LightColor::Red ? "red" : "blue"}});
  }
  return nlohmann::json{{"sources", sources}}.dump(2) + "\n";
}

Environment environment_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Environment env;
  for (const auto& s : j.at("sources")) {
    LightSource src;
    src.position.x() = s.at("x").get<double>();
    src.position.y() = s.at("y").get<double>();
    const std::string color = s.at("color").get<std::string>();
    if (color == "red")
      src.color = LightColor::Red;
    else if (color == "blue")
      src.color = LightColor::Blue;
    else
      throw std::runtime_error("unknown source color: " + color);
    env.sources.push_back(src);
  }
  return env;
}

}  // namespace selfmap
