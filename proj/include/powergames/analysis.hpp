#pragma once

#include <span>
#include <string>
#include <vector>

#include "powergames/scenario.hpp"

namespace powergames {

/// Dense square matrix, row-major.
struct Matrix {
  int n = 0;
  std::vector<double> a;

  static Matrix zero(int n);
  static Matrix identity(int n);

  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

/// Spectral radius (maximum eigenvalue modulus) to 1e-10 relative. Nonnegative
/// matrices go through shifted power iteration; anything else, or a stagnating
/// iteration, falls back to a dense eigensolve.
double spectral_radius(const Matrix& m);

/// True iff every off-diagonal entry is <= 0.
bool is_z_matrix(const Matrix& m);

/// True iff all principal minors are positive. Z-matrices use the exact
/// M-matrix characterization (spectral radius of the normalized off-diagonal
/// part < 1); general matrices enumerate minors, which is only supported up
/// to n = 20 (std::invalid_argument beyond).
bool is_p_matrix(const Matrix& m);

/// Worst-case power and interference bounds for the opportunistic game.
/// p_max[i][l] = sqrt(varsigma_i)/eta_hat_i^l; I_max assumes every other user at
/// p_max on that subchannel; p_min is the opportunistic best response against
/// that worst case; q_min = (p_min * eta_hat)^2 - sigma, clamped at zero.
struct BoundSet {
  int num_users = 0;
  int num_subchannels = 0;
  std::vector<double> p_max;  // [user][subchannel]
  std::vector<double> I_max;
  std::vector<double> p_min;
  std::vector<double> q_min;
  double sigma = 0.0;

  double at(const std::vector<double>& field, int user, int subchannel) const {
    return field[static_cast<std::size_t>(user) * num_subchannels + subchannel];
  }
};

enum class ConditionKind { UniquenessA, SpectralB, PricedD };

struct ConditionMatrix {
  Matrix m;
  ConditionKind kind = ConditionKind::UniquenessA;
  // Set when a q_min row collapsed to zero; the condition then trivially fails.
  bool degenerate = false;
};

BoundSet compute_bounds(const Scenario& scenario, std::span<const double> varsigma);

/// Uniqueness condition matrix for the opportunistic game: positive diagonal
/// (1/sqrt(varsigma_i)) * min_l(sqrt(q_min) * eta_hat), off-diagonal
/// -3*sqrt(varsigma_i) * max_l(g_hat/eta_hat). Uniqueness holds if it is a P-matrix.
ConditionMatrix matrix_A(const Scenario& scenario, const BoundSet& bounds,
                         std::span<const double> varsigma);

/// Spectral-radius form of the same condition: zero diagonal, nonnegative
/// off-diagonals equal to |A_ij| / A_ii; uniqueness holds if rho(B) < 1.
ConditionMatrix matrix_B(const Scenario& scenario, const BoundSet& bounds,
                         std::span<const double> varsigma);

/// Uniqueness condition matrix for the priced rate game: unit diagonal,
/// off-diagonal -max_l(g_hat_ij * (1 + price_i * psi_max_i^2) * psi_max_j / psi_min_i)
/// with psi_min = eta_hat and psi_max_i^l = sum_j g_hat_ij * P_j + eta_hat (the sum
/// includes j = i with unit normalized direct gain).
ConditionMatrix matrix_D(const Scenario& scenario, std::span<const double> power_budgets,
                         std::span<const double> prices);

/// All condition matrices and verdicts for one scenario. The tests are
/// sufficient conditions only: a failing verdict certifies nothing.
struct AnalysisReport {
  BoundSet bounds;
  ConditionMatrix A, B, D;
  bool opportunistic_p_matrix_pass = false;    // P-matrix test on A
  bool opportunistic_spectral_pass = false;    // rho(B) < 1
  double rho_B = 0.0;
  bool priced_p_matrix_pass = false;    // P-matrix test on D
  std::vector<double> varsigma, power_budgets, prices;
};

AnalysisReport analyze_scenario(const Scenario& scenario, std::span<const double> varsigma,
                                std::span<const double> power_budgets,
                                std::span<const double> prices);

std::string report_to_json(const AnalysisReport& report);

}  // namespace powergames
