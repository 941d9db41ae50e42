// Copyright 2026 The JNDQ Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "common.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "jndq/error.hpp"
#include "jndq/hash.hpp"

namespace jndq::cli {
namespace fs = std::filesystem;

fs::path resolve_path(const std::string& path) {
  fs::path p(path);
  if (p.is_relative()) {
    if (const char* root = std::getenv("JNDQ_DATA_ROOT"); root && *root) return fs::path(root) / p;
  }
  return p;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      const auto dash = item.find('-', 1);
      if (dash == std::string::npos) {
        out.push_back(std::stoi(item));
      } else {
        const int lo = std::stoi(item.substr(0, dash));
        const int hi = std::stoi(item.substr(dash + 1));
        if (hi < lo) throw Error(ErrorCode::kInvalidArgument, "descending range '" + item + "'");
        for (int v = lo; v <= hi; ++v) out.push_back(v);
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kInvalidArgument, "not an integer list: '" + text + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "empty integer list");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

fs::path RunManifest::write(const fs::path& dir) const {
  // Paths inside the output dir are stored relative to it so the record
  // does not depend on where the run happened.
  auto files = [&dir](const std::vector<fs::path>& paths) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : paths) {
      const auto rel = p.lexically_relative(dir);
      const bool inside = !rel.empty() && *rel.begin() != "..";
      arr.push_back({{"path", (inside ? rel : p).generic_string()}, {"sha256", sha256_file(p)}});
    }
    return arr;
  };
  const nlohmann::json doc = {{"command", command},
                              {"tool_version", JNDQ_VERSION},
                              {"config", config},
                              {"seeds", seeds},
                              {"inputs", files(inputs)},
                              {"outputs", files(outputs)}};
  const fs::path path = dir / "run_manifest.json";
  write_text(path, doc.dump(2) + "\n");
  return path;
}

}  // namespace jndq::cli
