// sgan/viz/plot.hpp
//
// Copyright 2026 The sganlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>

#include "sgan/tensor.hpp"

namespace sgan::viz {

// Renders a mel grid (decibels) as a grayscale PNG: frequency on the
// vertical axis (low bands at the bottom), time horizontal, fixed
// [-40, 0] dB ramp, each cell drawn cell_pixels wide.
void plot_mel_png(const Tensor& mel_db, const std::string& out_path,
                  int cell_pixels = 4);

}  // namespace sgan::viz
