#pragma once

#include <span>
#include <vector>

#include "fmto/exotic.hpp"
#include "fmto/optics.hpp"
#include "fmto/spectral.hpp"

/// Plain serial versions of the parallel kernels, written for clarity rather
/// than speed. Tests compare the optimized paths against these.
namespace fmto::reference {

/// Welch estimate with a direct O(N^2) DFT per segment.
WelchResult welch_psd(std::span<const double> t, std::span<const double> x,
                      const WelchOptions& options = {});

/// Frame renderer evaluating the spot pixel by pixel.
FrameSequence render_frames(const AngleSeries& angles, const ReadoutGeometry& geometry,
                            const RenderOptions& options, std::size_t first = 0,
                            std::size_t count = 0);

std::vector<CouplingBound> coupling_bound_curve(const ExoticSourceConfig& config,
                                                const std::vector<double>& lambdas,
                                                double eta, double t_mea);

}  // namespace fmto::reference
