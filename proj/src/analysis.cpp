#include "powergames/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "json.hpp"
#include "powergames/best_response.hpp"

namespace powergames {

using nlohmann::json;

Matrix Matrix::zero(int n) {
  Matrix m;
  m.n = n;
  m.a.assign(static_cast<std::size_t>(n) * n, 0.0);
  return m;
}

Matrix Matrix::identity(int n) {
  Matrix m = zero(n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

namespace {

double dense_spectral_radius(const Matrix& m) {
  Eigen::MatrixXd em(m.n, m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) em(i, j) = m.at(i, j);
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(em, /*computeEigenvectors=*/false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

bool nonnegative(const Matrix& m) {
  return std::all_of(m.a.begin(), m.a.end(), [](double v) { return v >= 0.0; });
}

// Power iteration on the shifted matrix A + sI. For nonnegative A the shift
// keeps the iterate strictly positive, so the Collatz-Wielandt bounds
//   min_i (Bx)_i/x_i  <=  rho(B)  <=  max_i (Bx)_i/x_i
// give a certified enclosure each step; we stop once it tightens to 1e-12
// relative. Reducible matrices whose enclosure never tightens fall through to
// the dense solver.
bool power_iteration_radius(const Matrix& m, double* radius) {
  const int n = m.n;
  double shift = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += m.at(i, j);
    shift = std::max(shift, row);
  }
  if (shift == 0.0) {  // zero matrix
    *radius = 0.0;
    return true;
  }

  std::vector<double> x(n, 1.0 / n), y(n);
  for (int it = 0; it < 10000; ++it) {
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
      double acc = shift * x[i];  // diagonal shift keeps every component positive
      for (int j = 0; j < n; ++j) acc += m.at(i, j) * x[j];
      y[i] = acc;
      norm = std::max(norm, acc);
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int i = 0; i < n; ++i) {
      const double ratio = y[i] / x[i];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    if (hi - lo <= 1e-12 * hi) {
      *radius = std::max(0.5 * (lo + hi) - shift, 0.0);
      return true;
    }
    for (int i = 0; i < n; ++i) x[i] = y[i] / norm;
  }
  return false;  // enclosure never tightened
}

}  // namespace

double spectral_radius(const Matrix& m) {
  if (m.n == 0) return 0.0;
  if (m.n == 1) return std::abs(m.a[0]);
  if (nonnegative(m)) {
    double radius = 0.0;
    if (power_iteration_radius(m, &radius)) return radius;
  }
  return dense_spectral_radius(m);
}

bool is_z_matrix(const Matrix& m) {
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j)
      if (i != j && m.at(i, j) > 0.0) return false;
  return true;
}

namespace {

// Determinant by partially pivoted LU; k up to 20.
double lu_determinant(std::vector<double>& a, int k) {
  double det = 1.0;
  for (int col = 0; col < k; ++col) {
    int pivot = col;
    for (int r = col + 1; r < k; ++r)
      if (std::abs(a[r * k + col]) > std::abs(a[pivot * k + col])) pivot = r;
    if (a[pivot * k + col] == 0.0) return 0.0;
    if (pivot != col) {
      for (int c = 0; c < k; ++c) std::swap(a[pivot * k + c], a[col * k + c]);
      det = -det;
    }
    det *= a[col * k + col];
    for (int r = col + 1; r < k; ++r) {
      const double f = a[r * k + col] / a[col * k + col];
      for (int c = col; c < k; ++c) a[r * k + c] -= f * a[col * k + c];
    }
  }
  return det;
}

bool all_principal_minors_positive(const Matrix& m) {
  const int n = m.n;
  std::vector<int> index;
  std::vector<double> sub;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    index.clear();
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) index.push_back(i);
    const int k = static_cast<int>(index.size());
    sub.resize(static_cast<std::size_t>(k) * k);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) sub[r * k + c] = m.at(index[r], index[c]);
    if (!(lu_determinant(sub, k) > 0.0)) return false;
  }
  return true;
}

}  // namespace

bool is_p_matrix(const Matrix& m) {
  if (m.n < 1) throw std::invalid_argument("is_p_matrix: empty matrix");
  if (is_z_matrix(m)) {
    // A Z-matrix is a P-matrix iff it is a nonsingular M-matrix, i.e. the
    // normalized off-diagonal part has spectral radius below one.
    for (int i = 0; i < m.n; ++i)
      if (!(m.at(i, i) > 0.0)) return false;
    Matrix c = Matrix::zero(m.n);
    for (int i = 0; i < m.n; ++i)
      for (int j = 0; j < m.n; ++j)
        if (i != j) c.at(i, j) = -m.at(i, j) / m.at(i, i);
    return spectral_radius(c) < 1.0;
  }
  if (m.n > 20)
    throw std::invalid_argument("is_p_matrix: minor enumeration unsupported beyond 20x20");
  return all_principal_minors_positive(m);
}

BoundSet compute_bounds(const Scenario& scenario, std::span<const double> varsigma) {
  const int m = scenario.num_users;
  const int l = scenario.num_subchannels;
  if (static_cast<int>(varsigma.size()) != m)
    throw std::invalid_argument("compute_bounds: varsigma length mismatch");
  for (double v : varsigma)
    if (!(v > 0.0)) throw std::invalid_argument("compute_bounds: varsigma must be positive");

  BoundSet bounds;
  bounds.num_users = m;
  bounds.num_subchannels = l;
  const std::size_t size = static_cast<std::size_t>(m) * l;
  bounds.p_max.resize(size);
  bounds.I_max.resize(size);
  bounds.p_min.resize(size);
  bounds.q_min.resize(size);

  auto idx = [l](int i, int s) { return static_cast<std::size_t>(i) * l + s; };

  for (int i = 0; i < m; ++i)
    for (int s = 0; s < l; ++s) bounds.p_max[idx(i, s)] = std::sqrt(varsigma[i]) / scenario.eta_hat(i, s);

  for (int i = 0; i < m; ++i) {
    for (int s = 0; s < l; ++s) {
      double acc = scenario.eta_hat(i, s);
      for (int j = 0; j < m; ++j)
        if (j != i) acc += scenario.g_hat(i, j, s) * bounds.p_max[idx(j, s)];
      bounds.I_max[idx(i, s)] = acc;
    }
  }

  // Worst case for user i on subchannel s: everyone else at maximum power on
  // that subchannel only, noise-only interference elsewhere.
  std::vector<double> interference(l);
  for (int i = 0; i < m; ++i) {
    for (int s = 0; s < l; ++s) {
      for (int k = 0; k < l; ++k) interference[k] = scenario.eta_hat(i, k);
      interference[s] = bounds.I_max[idx(i, s)];
      const Allocation a = br_opportunistic(interference, varsigma[i]);
      bounds.p_min[idx(i, s)] = a.powers[s];
    }
  }

  double min_q = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    for (int s = 0; s < l; ++s) {
      const double q = bounds.p_min[idx(i, s)] * scenario.eta_hat(i, s);
      bounds.q_min[idx(i, s)] = q * q;
      min_q = std::min(min_q, q * q);
    }
  }
  bounds.sigma = 1e-9 * min_q;
  for (double& q : bounds.q_min) q = std::max(q - bounds.sigma, 0.0);
  return bounds;
}

ConditionMatrix matrix_A(const Scenario& scenario, const BoundSet& bounds,
                         std::span<const double> varsigma) {
  const int m = scenario.num_users;
  ConditionMatrix cond;
  cond.kind = ConditionKind::UniquenessA;
  cond.m = Matrix::zero(m);
  for (int i = 0; i < m; ++i) {
    double diag = std::numeric_limits<double>::infinity();
    for (int s = 0; s < scenario.num_subchannels; ++s)
      diag = std::min(diag, std::sqrt(bounds.at(bounds.q_min, i, s)) * scenario.eta_hat(i, s));
    diag /= std::sqrt(varsigma[i]);
    if (diag == 0.0) cond.degenerate = true;
    cond.m.at(i, i) = diag;
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      double worst = 0.0;
      for (int s = 0; s < scenario.num_subchannels; ++s)
        worst = std::max(worst, scenario.g_hat(i, j, s) / scenario.eta_hat(i, s));
      cond.m.at(i, j) = -3.0 * std::sqrt(varsigma[i]) * worst;
    }
  }
  return cond;
}

ConditionMatrix matrix_B(const Scenario& scenario, const BoundSet& bounds,
                         std::span<const double> varsigma) {
  const ConditionMatrix a = matrix_A(scenario, bounds, varsigma);
  ConditionMatrix cond;
  cond.kind = ConditionKind::SpectralB;
  cond.degenerate = a.degenerate;
  cond.m = Matrix::zero(scenario.num_users);
  for (int i = 0; i < scenario.num_users; ++i) {
    const double diag = a.m.at(i, i);
    for (int j = 0; j < scenario.num_users; ++j) {
      if (i == j) continue;
      cond.m.at(i, j) =
          diag > 0.0 ? -a.m.at(i, j) / diag : std::numeric_limits<double>::infinity();
    }
  }
  return cond;
}

ConditionMatrix matrix_D(const Scenario& scenario, std::span<const double> power_budgets,
                         std::span<const double> prices) {
  const int m = scenario.num_users;
  const int l = scenario.num_subchannels;
  if (static_cast<int>(power_budgets.size()) != m || static_cast<int>(prices.size()) != m)
    throw std::invalid_argument("matrix_D: parameter length mismatch");
  for (int i = 0; i < m; ++i)
    if (!(power_budgets[i] > 0.0) || !(prices[i] >= 0.0))
      throw std::invalid_argument("matrix_D: budgets must be positive, prices nonnegative");

  // psi_max includes the user's own budget through the unit direct gain.
  std::vector<double> psi_max(static_cast<std::size_t>(m) * l);
  for (int i = 0; i < m; ++i) {
    for (int s = 0; s < l; ++s) {
      double acc = scenario.eta_hat(i, s);
      for (int j = 0; j < m; ++j) acc += scenario.g_hat(i, j, s) * power_budgets[j];
      psi_max[static_cast<std::size_t>(i) * l + s] = acc;
    }
  }

  ConditionMatrix cond;
  cond.kind = ConditionKind::PricedD;
  cond.m = Matrix::identity(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      double worst = 0.0;
      for (int s = 0; s < l; ++s) {
        const double psi_i = psi_max[static_cast<std::size_t>(i) * l + s];
        const double psi_j = psi_max[static_cast<std::size_t>(j) * l + s];
        const double value = scenario.g_hat(i, j, s) * (1.0 + prices[i] * psi_i * psi_i) * psi_j /
                             scenario.eta_hat(i, s);
        worst = std::max(worst, value);
      }
      cond.m.at(i, j) = -worst;
    }
  }
  return cond;
}

AnalysisReport analyze_scenario(const Scenario& scenario, std::span<const double> varsigma,
                                std::span<const double> power_budgets,
                                std::span<const double> prices) {
  AnalysisReport report;
  report.varsigma.assign(varsigma.begin(), varsigma.end());
  report.power_budgets.assign(power_budgets.begin(), power_budgets.end());
  report.prices.assign(prices.begin(), prices.end());
  report.bounds = compute_bounds(scenario, varsigma);
  report.A = matrix_A(scenario, report.bounds, varsigma);
  report.B = matrix_B(scenario, report.bounds, varsigma);
  report.D = matrix_D(scenario, power_budgets, prices);
  report.opportunistic_p_matrix_pass = !report.A.degenerate && is_p_matrix(report.A.m);
  if (report.B.degenerate) {
    report.rho_B = std::numeric_limits<double>::infinity();
    report.opportunistic_spectral_pass = false;
  } else {
    report.rho_B = spectral_radius(report.B.m);
    report.opportunistic_spectral_pass = report.rho_B < 1.0;
  }
  report.priced_p_matrix_pass = is_p_matrix(report.D.m);
  return report;
}

namespace {

json grid_json(const std::vector<double>& data, int rows, int cols) {
  json out = json::array();
  for (int r = 0; r < rows; ++r) {
    json row = json::array();
    for (int c = 0; c < cols; ++c) row.push_back(data[static_cast<std::size_t>(r) * cols + c]);
    out.push_back(std::move(row));
  }
  return out;
}

json matrix_json(const ConditionMatrix& cond) {
  json entries = json::array();
  for (double v : cond.m.a) entries.push_back(std::isfinite(v) ? json(v) : json());
  return json{{"size", cond.m.n}, {"entries_row_major", std::move(entries)},
              {"degenerate", cond.degenerate}};
}

}  // namespace

std::string report_to_json(const AnalysisReport& report) {
  const BoundSet& b = report.bounds;
  json doc{
      {"schema_version", 1},
      {"sigma", b.sigma},
      {"bounds",
       {{"p_max", grid_json(b.p_max, b.num_users, b.num_subchannels)},
        {"I_max", grid_json(b.I_max, b.num_users, b.num_subchannels)},
        {"p_min", grid_json(b.p_min, b.num_users, b.num_subchannels)},
        {"q_min", grid_json(b.q_min, b.num_users, b.num_subchannels)}}},
      {"matrix_A", matrix_json(report.A)},
      {"matrix_B", matrix_json(report.B)},
      {"matrix_D", matrix_json(report.D)},
      {"verdicts",
       {{"opportunistic_p_matrix_pass", report.opportunistic_p_matrix_pass},
        {"opportunistic_spectral_pass", report.opportunistic_spectral_pass},
        {"spectral_radius_B", std::isfinite(report.rho_B) ? json(report.rho_B) : json()},
        {"priced_p_matrix_pass", report.priced_p_matrix_pass},
        {"note", "all tests are sufficient conditions; a failing test certifies nothing"}}},
      {"inputs",
       {{"varsigma", report.varsigma},
        {"power_budgets", report.power_budgets},
        {"prices", report.prices}}},
      {"metadata",
       {{"psi_max_includes_own_budget", true}, {"rates_in_nats", true}}}};
  return doc.dump(2);
}

}  // namespace powergames
