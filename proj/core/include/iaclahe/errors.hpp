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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iaclahe {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed image stream. The message names the byte offset of the defect.
class DecodeError : public Error {
public:
    DecodeError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Well-formed stream in a format variant this library does not handle
/// (e.g. 16-bit PNG, interlaced PNG, PNM with maxval != 255).
class UnsupportedFormatError : public Error {
public:
    using Error::Error;
};

/// Corrupt or incompatible estimator checkpoint file.
class CheckpointError : public Error {
public:
    using Error::Error;
};

/// A finite-difference probe would cross a clip-limit kink, so the numeric
/// gradient is not trustworthy. Names the offending tile.
class KinkError : public Error {
public:
    KinkError(const std::string& what, int tile_row, int tile_col)
        : Error(what), tile_row_(tile_row), tile_col_(tile_col) {}

    int tile_row() const noexcept { return tile_row_; }
    int tile_col() const noexcept { return tile_col_; }

private:
    int tile_row_;
    int tile_col_;
};

}  // namespace iaclahe
