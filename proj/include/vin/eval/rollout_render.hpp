#pragma once

// Renders predicted rollouts next to ground truth as numbered lossless
// raster files (binary PPM), plus optional max-over-time trajectory-trail
// images on a masked (black) background.

#include <string>

#include "vin/data/dataset.hpp"
#include "vin/models/model.hpp"

namespace vin::eval {

struct RolloutRenderOptions {
    int horizon = 50;        // 0: re-render only the observed frames
    bool trail = false;      // additionally write trail images
    bool mask_background = false;  // render on black instead of the
                                   // regenerated per-simulation background
    std::string out_dir = "rollout_out";
};

void write_ppm(const render::Frame& frame, const std::string& path);
render::Frame read_ppm(const std::string& path);

// Writes obs_XX.ppm for the observed window and pred_XXX.ppm side-by-side
// panels (truth | divider | prediction) for each rollout step.
void render_rollout(models::Model<float>& model, const data::Dataset& dataset,
                    int sequence, const RolloutRenderOptions& options);

}  // namespace vin::eval
