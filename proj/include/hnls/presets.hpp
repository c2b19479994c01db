#pragma once

#include "json.hpp"

#include "hnls/types.hpp"

namespace hnls {

// Analytic data presets, described by JSON objects such as
//   {"preset": "gaussian", "center": 1.5, "width": 0.3, "amplitude": [1, 0]}
//                                   optional "zero_ends": true clears both end nodes
//   {"preset": "sine", "n": 2, "amplitude": 0.5}
//   {"preset": "zero"}
//   {"file": "path"}           rows "re im", one per node / time sample
// A missing object means zero.
ComplexField gaussian_bump(const GridSpec& grid, double center, double width, cplx amplitude);
ComplexField sine_mode(const GridSpec& grid, int n, cplx amplitude);

ComplexField field_from_json(const nlohmann::json& spec, const GridSpec& grid);
// Series presets: zero, constant, sine (sin(n pi t / T)), pulse (sin^2 bump on [0,T]).
TimeSeries series_from_json(const nlohmann::json& spec, const GridSpec& grid);
// Source presets: zero, or a spatial field preset times a time factor
//   {"space": {...}, "time": {"preset": "cosine", "omega": 1}}.
SpaceTimeField source_from_json(const nlohmann::json& spec, const GridSpec& grid);

cplx amplitude_from_json(const nlohmann::json& spec, const char* key = "amplitude");

}  // namespace hnls
