// Copyright 2026 The iaclahe Authors
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

#include <cstdint>

#include "iaclahe/image.hpp"

namespace iaclahe {

// Deterministic procedural test images: gradients, soft blobs, sinusoidal
// texture and noise, spanning most of the intensity range. Used by the
// benchmark harness and the self-contained evaluation pipelines.

Plane synth_plane(int w, int h, std::uint64_t seed);
RgbImage synth_rgb(int w, int h, std::uint64_t seed);

}  // namespace iaclahe
