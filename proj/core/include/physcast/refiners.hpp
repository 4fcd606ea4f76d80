#pragma once

#include <cstdint>
#include <memory>

#include "physcast/interfaces.hpp"
#include "physcast/nn.hpp"

namespace physcast {

class IdentityRefiner final : public Refiner {
 public:
  ScalarField refine(const ScalarField& propagated, const ConflictMask&) const override { return propagated; }
};

struct InpaintConfig {
  double tolerance = 1e-6;  // stop when the largest update of a sweep falls below this
  int max_sweeps = 10000;
};

// Keeps mask = 1 pixels and fills mask = 0 pixels with the discrete harmonic
// interpolant (4-neighbour average, edges replicated), solved by
// Gauss-Seidel sweeps in raster order. Throws std::invalid_argument if the
// mask has conflicts but no trusted pixel.
ScalarField refine_inpaint(const ScalarField& propagated, const ConflictMask& mask, const InpaintConfig& cfg = {});

class InpaintRefiner final : public Refiner {
 public:
  explicit InpaintRefiner(InpaintConfig cfg = {}) : cfg_(cfg) {}
  ScalarField refine(const ScalarField& propagated, const ConflictMask& mask) const override {
    return refine_inpaint(propagated, mask, cfg_);
  }

 private:
  InpaintConfig cfg_;
};

using GeneratorNet = nn::EncoderDecoder<float>;

// Generator: [propagated, mask] in, one correction channel out.
GeneratorNet make_generator(std::array<int, 4> widths, std::uint64_t seed, double head_scale = 0.1);

// Residual refinement: propagated + generator([propagated, mask]).
class NetRefiner final : public Refiner {
 public:
  explicit NetRefiner(std::shared_ptr<const GeneratorNet> net) : net_(std::move(net)) {}
  ScalarField refine(const ScalarField& propagated, const ConflictMask& mask) const override;

 private:
  std::shared_ptr<const GeneratorNet> net_;
};

nn::Tensor<float> generator_input(const ScalarField& propagated, const ConflictMask& mask);

}  // namespace physcast
