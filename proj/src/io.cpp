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

#include "epmflux/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "epmflux/errors.hpp"

namespace epmflux {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, result.ptr);
}

Json matrix_to_json(const Matrix& m) {
  if (!m.is_square()) throw DimensionMismatch("matrix_to_json: square matrices only");
  Json j;
  j["dim"] = m.rows();
  Json re = Json::array();
  Json im = Json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int c = 0; c < m.cols(); ++c) {
      re.push_back(m(i, c).real());
      im.push_back(m(i, c).imag());
    }
  j["real"] = std::move(re);
  j["imag"] = std::move(im);
  return j;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("real"))
    throw ConfigError("operator literal must carry dim and real fields");
  const int d = j.at("dim").get<int>();
  if (d <= 0 || d > 64) throw ConfigError("operator literal dimension out of range");
  const auto& re = j.at("real");
  const bool has_imag = j.contains("imag");
  if (static_cast<int>(re.size()) != d * d ||
      (has_imag && static_cast<int>(j.at("imag").size()) != d * d))
    throw ConfigError("operator literal entry count does not match dim");
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int c = 0; c < d; ++c) {
      const int idx = i * d + c;
      const double real = re.at(idx).get<double>();
      const double imag = has_imag ? j.at("imag").at(idx).get<double>() : 0.0;
      m(i, c) = Complex(real, imag);
    }
  if (!m.all_finite()) throw ConfigError("operator literal has non-finite entries");
  return m;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open file for writing: " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_kraus_file(const std::string& path, const std::vector<Matrix>& kraus) {
  Json j = Json::array();
  for (const Matrix& a : kraus) j.push_back(matrix_to_json(a));
  write_text_file(path, j.dump(2) + "\n");
}

std::vector<Matrix> read_kraus_file(const std::string& path) {
  const Json j = Json::parse(read_text_file(path));
  if (!j.is_array() || j.empty()) throw ConfigError("Kraus file must be a non-empty list");
  std::vector<Matrix> kraus;
  for (const auto& entry : j) kraus.push_back(matrix_from_json(entry));
  return kraus;
}

Json triple_to_json(const TripleDecomposition& d) {
  Json j;
  j["type"] = "triple";
  j["a"] = d.a;
  j["c"] = d.c;
  j["tau_d"] = matrix_to_json(d.tau_d.matrix());
  j["tau_c"] = matrix_to_json(d.tau_c.matrix());
  j["reference"] = matrix_to_json(d.reference.matrix());
  return j;
}

Json bsa_to_json(const BsaDecomposition& d) {
  Json j;
  j["type"] = "bsa";
  j["lambda"] = d.lambda;
  j["ppt_min_eigenvalue"] = d.ppt_min_eigenvalue;
  if (d.rho_entangled) j["rho_entangled"] = matrix_to_json(d.rho_entangled->matrix());
  if (d.rho_separable) j["rho_separable"] = matrix_to_json(d.rho_separable->matrix());
  Json terms = Json::array();
  for (const auto& term : d.product_terms) {
    Json t;
    t["r"] = term.weight;
    t["rho_a"] = matrix_to_json(term.state_a.matrix());
    t["rho_b"] = matrix_to_json(term.state_b.matrix());
    terms.push_back(std::move(t));
  }
  j["product_terms"] = std::move(terms);
  return j;
}

Json correlation_to_json(const CorrelationSplit& d) {
  Json j;
  j["type"] = "correlation_operator";
  j["marginal_a"] = matrix_to_json(d.marginal_a.matrix());
  j["marginal_b"] = matrix_to_json(d.marginal_b.matrix());
  j["correlation_operator"] = matrix_to_json(d.correlation_operator);
  return j;
}

Json jarzynski_to_json(const JarzynskiReport& report) {
  Json j;
  j["form"] = to_string(report.form);
  j["lhs"] = report.lhs;
  j["rhs"] = report.rhs;
  j["abs_error"] = std::abs(report.lhs - report.rhs);
  Json terms;
  for (const auto& [name, value] : report.term_breakdown) terms[name] = value;
  j["term_breakdown"] = std::move(terms);
  return j;
}

namespace {

void append_label(std::ostringstream& out, const std::array<int, 2>& label, bool bipartite) {
  out << label[0];
  if (bipartite) out << ',' << label[1];
}

}  // namespace

std::string epm_csv(const EpmDistribution& dist) {
  const bool bipartite = dist.initial_levels().bipartite;
  std::ostringstream out;
  if (bipartite)
    out << "l_A,l_B,k_A,k_B,E_i,E_f,delta_E,p_i,p_f,p_joint\n";
  else
    out << "l,k,E_i,E_f,delta_E,p_i,p_f,p_joint\n";
  for (int l = 0; l < dist.initial_levels().size(); ++l) {
    for (int k = 0; k < dist.final_levels().size(); ++k) {
      append_label(out, dist.initial_levels().sublabels[l], bipartite);
      out << ',';
      append_label(out, dist.final_levels().sublabels[k], bipartite);
      out << ',' << format_double(dist.initial_levels().energies[l]) << ','
          << format_double(dist.final_levels().energies[k]) << ','
          << format_double(dist.delta_e(l, k)) << ','
          << format_double(dist.p_initial()[l]) << ',' << format_double(dist.p_final()[k])
          << ',' << format_double(dist.joint(l, k)) << '\n';
    }
  }
  return out.str();
}

std::string entropy_csv(const TrajectoryEntropyTable& table) {
  std::ostringstream out;
  const bool bipartite = !table.rows.empty() && table.rows.front().label_initial[1] >= 0;
  if (bipartite)
    out << "l_A,l_B,k_A,k_B";
  else
    out << "l,k";
  out << ",p_forward,p_backward,ds_tot,tpm_part,d_sigma,d_theta,d_sigma_coh,d_psi,"
         "d_lambda,d_xi,residual,flag\n";
  for (const auto& row : table.rows) {
    append_label(out, row.label_initial, bipartite);
    out << ',';
    append_label(out, row.label_final, bipartite);
    out << ',' << format_double(row.p_forward) << ',' << format_double(row.p_backward) << ','
        << format_double(row.ds_tot) << ',' << format_double(row.tpm_part) << ','
        << format_double(row.d_sigma) << ',' << format_double(row.d_theta) << ','
        << format_double(row.d_sigma_coh) << ',' << format_double(row.d_psi) << ','
        << format_double(row.d_lambda) << ',' << format_double(row.d_xi) << ','
        << format_double(row.residual) << ','
        << (row.flag == SupportFlag::Ok
                ? "ok"
                : row.flag == SupportFlag::ForwardZero ? "forward_zero" : "backward_zero")
        << '\n';
  }
  return out.str();
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char buffer[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buffer[i] = digits[hash & 0xF];
    hash >>= 4;
  }
  buffer[16] = '\0';
  return std::string(buffer);
}

}  // namespace epmflux
