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

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace testutil {

// all test artifacts live under one disposable root so stray runs from a
// source checkout cannot litter it
inline std::filesystem::path scratch_root() {
    const auto root = std::filesystem::current_path() / "test-scratch";
    std::filesystem::create_directories(root);
    return root;
}

// scratch directory wiped on creation
inline std::filesystem::path fresh_dir(const std::string& name) {
    const auto p = scratch_root() / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
    const std::string s = read_file(p);
    return {s.begin(), s.end()};
}

struct CmdResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

#ifdef IACLAHE_CLI_PATH
inline CmdResult run_cli(const std::string& args) {
    static int counter = 0;
    const auto base = scratch_root() / ("cli_io_" + std::to_string(counter++));
    const std::string out_path = base.string() + ".out";
    const std::string err_path = base.string() + ".err";
    const std::string cmd = std::string("\"") + IACLAHE_CLI_PATH + "\" " + args + " > \"" +
                            out_path + "\" 2> \"" + err_path + "\"";
    const int rc = std::system(cmd.c_str());

    CmdResult result;
    result.exit_code = rc == -1 ? -1 : (WIFEXITED(rc) ? WEXITSTATUS(rc) : -2);
    result.out = read_file(out_path);
    result.err = read_file(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return result;
}
#endif

}  // namespace testutil
