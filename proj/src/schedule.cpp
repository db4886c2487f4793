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

#include "epmflux/schedule.hpp"

#include <cmath>
#include <utility>

#include "epmflux/errors.hpp"

namespace epmflux {

HamiltonianSchedule::HamiltonianSchedule(std::function<Matrix(double)> h, double t_i, double t_f)
    : h_(std::move(h)), t_i_(t_i), t_f_(t_f) {
  if (!(t_f_ > t_i_)) throw Error("schedule: t_f must exceed t_i");
}

HamiltonianSchedule HamiltonianSchedule::bipartite(BipartiteParts parts, double t_i,
                                                   double t_f) {
  if (parts.h_int(t_i).frobenius_norm() > 1e-12 || parts.h_int(t_f).frobenius_norm() > 1e-12)
    throw Error("bipartite schedule: interaction does not vanish at the endpoints");
  const int da = parts.dim_a;
  const int db = parts.dim_b;
  auto evaluator = [parts, da, db](double t) {
    Matrix h = kron(parts.h_a(t), Matrix::identity(db)) +
               kron(Matrix::identity(da), parts.h_b(t)) + parts.h_int(t);
    return h;
  };
  HamiltonianSchedule schedule(evaluator, t_i, t_f);
  schedule.parts_ = std::move(parts);
  return schedule;
}

HamiltonianSchedule make_static_schedule(const Matrix& h, double t_i, double t_f) {
  return HamiltonianSchedule([h](double) { return h; }, t_i, t_f);
}

HamiltonianSchedule make_rotating_xz(double omega_rabi, double omega_drive, double t_i,
                                     double t_f) {
  return HamiltonianSchedule(
      [omega_rabi, omega_drive](double t) {
        return 0.5 * omega_rabi *
               (std::sin(omega_drive * t) * ops::sigma_x() +
                std::cos(omega_drive * t) * ops::sigma_z());
      },
      t_i, t_f);
}

HamiltonianSchedule make_bipartite_switched(const Matrix& h_a_initial, const Matrix& h_a_final,
                                            const Matrix& h_b_initial, const Matrix& h_b_final,
                                            const Matrix& interaction, double strength,
                                            double t_i, double t_f) {
  const int da = h_a_initial.rows();
  const int db = h_b_initial.rows();
  if (interaction.rows() != da * db)
    throw DimensionMismatch("bipartite_switched: interaction dimension mismatch");
  const double duration = t_f - t_i;
  auto ramp = [t_i, duration](const Matrix& from, const Matrix& to, double t) {
    const double s = std::clamp((t - t_i) / duration, 0.0, 1.0);
    return (1.0 - s) * from + s * to;
  };
  BipartiteParts parts;
  parts.dim_a = da;
  parts.dim_b = db;
  parts.h_a = [=](double t) { return ramp(h_a_initial, h_a_final, t); };
  parts.h_b = [=](double t) { return ramp(h_b_initial, h_b_final, t); };
  parts.h_int = [=](double t) {
    const double phase = std::sin(M_PI * (t - t_i) / duration);
    return (strength * phase * phase) * interaction;
  };
  return HamiltonianSchedule::bipartite(std::move(parts), t_i, t_f);
}

}  // namespace epmflux
