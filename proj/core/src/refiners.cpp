#include "physcast/refiners.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace physcast {

ScalarField refine_inpaint(const ScalarField& propagated, const ConflictMask& mask, const InpaintConfig& cfg) {
  require_same_shape(propagated.shape(), mask.shape(), "refine_inpaint");
  const std::size_t holes = count_conflicts(mask);
  if (holes == 0) return propagated;
  if (holes == mask.size()) throw std::invalid_argument("refine_inpaint: mask has no trusted pixel to anchor the fill");

  ScalarField out = propagated;
  const int h = out.height();
  const int w = out.width();

  // Start holes at the anchor mean so the sweep begins inside the anchor range.
  double anchor_sum = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) anchor_sum += propagated[i];
  const double start = anchor_sum / static_cast<double>(mask.size() - holes);
  std::vector<std::size_t> hole_index;
  hole_index.reserve(holes);
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!mask[i]) {
      out[i] = start;
      hole_index.push_back(i);
    }

  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    double largest = 0.0;
    for (std::size_t i : hole_index) {
      const int y = static_cast<int>(i / w);
      const int x = static_cast<int>(i % w);
      const double avg = 0.25 * (out(std::max(y - 1, 0), x) + out(std::min(y + 1, h - 1), x) +
                                 out(y, std::max(x - 1, 0)) + out(y, std::min(x + 1, w - 1)));
      largest = std::max(largest, std::abs(avg - out[i]));
      out[i] = avg;
    }
    if (largest < cfg.tolerance) break;
  }
  return out;
}

GeneratorNet make_generator(std::array<int, 4> widths, std::uint64_t seed, double head_scale) {
  GeneratorNet net({2, 1, widths}, "generator");
  nn::init_he(net.params(), seed, head_scale);
  return net;
}

nn::Tensor<float> generator_input(const ScalarField& propagated, const ConflictMask& mask) {
  require_same_shape(propagated.shape(), mask.shape(), "generator input");
  const ScalarField m = to_scalar(mask);
  const ScalarField* planes[2] = {&propagated, &m};
  return nn::stack<float>(std::span<const ScalarField* const>(planes));
}

ScalarField NetRefiner::refine(const ScalarField& propagated, const ConflictMask& mask) const {
  const auto correction = net_->forward(generator_input(propagated, mask));
  return propagated + nn::channel(correction, 0);
}

}  // namespace physcast
