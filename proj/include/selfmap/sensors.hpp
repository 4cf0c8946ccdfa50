#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "selfmap/arm.hpp"
#include "selfmap/common.hpp"

namespace selfmap {

enum class LightColor { Red, Blue };

struct LightSource {
  Vec2 position = Vec2::Zero();
  LightColor color = LightColor::Red;
};

struct Environment {
  std::vector<LightSource> sources;
};

struct EnvironmentBounds {
  double x_min = 4.0, x_max = 8.0;
  double y_min = -4.0, y_max = 4.0;
};

// Line retina behind a pinhole lens, carried by the end-effector but keeping
// a fixed absolute orientation. Three photoreceptors per color sit on the
// retina line; the lens center sits lens_offset in front of it along the
// viewing axis.
struct RetinaGeometry {
  std::array<double, 3> photoreceptor_offsets{-0.2, 0.0, 0.2};
  double lens_offset = 0.2;
  double orientation = 0.0;  // absolute viewing-axis angle; 0 faces +x
};

inline constexpr int kRetinaDim = 6;  // 3 red then 3 blue, offsets ascending

// Exteroceptive reading for one end-effector configuration. Scenario 1 reads
// the tip coordinates directly; scenario 2 reads photoreceptor excitations.
class Sensor {
 public:
  virtual ~Sensor() = default;
  virtual int dimension() const = 0;
  virtual VecX sense(const EndEffectorConfig& c) const = 0;
};

class PositionSensor final : public Sensor {
 public:
  int dimension() const override { return 2; }
  VecX sense(const EndEffectorConfig& c) const override;
};

class RetinaSensor final : public Sensor {
 public:
  RetinaSensor(RetinaGeometry geom, Environment env)
      : geom_(geom), env_(std::move(env)) {}
  int dimension() const override { return kRetinaDim; }
  VecX sense(const EndEffectorConfig& c) const override;

 private:
  RetinaGeometry geom_;
  Environment env_;
};

VecX sense_position(const EndEffectorConfig& c);

// 1-D retina coordinate of the source's image, or nothing when the source is
// not strictly in front of the lens plane (no image forms).
std::optional<double> project_source(const Vec2& source,
                                     const EndEffectorConfig& retina_center,
                                     const RetinaGeometry& geom);

VecX sense_retina(const EndEffectorConfig& c, const Environment& env,
                  const RetinaGeometry& geom);

// Sources drawn uniformly in bounds; bounds must stay clear of the arm's
// reachable disk so the retina can never collide with a source.
Environment generate_environment(std::uint64_t seed, int n_red, int n_blue,
                                 const EnvironmentBounds& bounds,
                                 const ArmGeometry& arm);

std::string environment_to_json(const Environment& env);
Environment environment_from_json(const std::string& text);

}  // namespace selfmap
