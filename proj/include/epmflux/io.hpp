// Copyright 2026 The epmflux developers
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
#include <vector>

#include <json.hpp>

#include "epmflux/ftheorems.hpp"
#include "epmflux/matrix.hpp"
#include "epmflux/resources.hpp"
#include "epmflux/state.hpp"

namespace epmflux {

using Json = nlohmann::json;

/// Shortest round-trip decimal representation (at most 17 significant digits).
std::string format_double(double v);

/// Operator literal: {"dim": d, "real": [...], "imag": [...]} in row-major order.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

/// Kraus-set file: JSON list of operator literals.
void write_kraus_file(const std::string& path, const std::vector<Matrix>& kraus);
std::vector<Matrix> read_kraus_file(const std::string& path);

Json triple_to_json(const TripleDecomposition& d);
Json bsa_to_json(const BsaDecomposition& d);
Json correlation_to_json(const CorrelationSplit& d);
Json jarzynski_to_json(const JarzynskiReport& report);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// CSV emission of a joint table: one row per (l, k) label pair, 17 digits.
std::string epm_csv(const EpmDistribution& dist);

/// CSV emission of a trajectory entropy table.
std::string entropy_csv(const TrajectoryEntropyTable& table);

/// FNV-1a 64-bit hash in hex, used to fingerprint scenario configs.
std::string fnv1a_hex(const std::string& data);

}  // namespace epmflux
