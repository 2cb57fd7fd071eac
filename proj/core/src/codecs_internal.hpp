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
#include <span>

#include "iaclahe/image.hpp"

namespace iaclahe::detail {

bool looks_like_png(std::span<const std::uint8_t> bytes);
bool looks_like_pnm(std::span<const std::uint8_t> bytes);

RgbImage decode_png(std::span<const std::uint8_t> bytes);
RgbImage decode_pnm(std::span<const std::uint8_t> bytes);

}  // namespace iaclahe::detail
