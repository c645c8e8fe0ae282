#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace pushmpc {

enum class QpStatus { Optimal, Infeasible, MaxIter };

// min 1/2 z'Hz + f'z  s.t.  E z = e,  G z <= g.
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd E;
  Eigen::VectorXd e;
  Eigen::MatrixXd G;
  Eigen::VectorXd g;

  int dim() const { return int(H.rows()); }
  void validate() const;
};

struct QpSolution {
  QpStatus status = QpStatus::Infeasible;
  Eigen::VectorXd z;
  Eigen::VectorXd lambda_eq;
  Eigen::VectorXd mu_ineq;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  double regularization = 0.0;
  std::vector<int> active;  // inequality rows tight in the final working set
};

struct KktReport {
  double stationarity = 0.0;
  double primal_equality = 0.0;
  double primal_inequality = 0.0;
  double dual_feasibility = 0.0;
  double complementarity = 0.0;
  double max_residual() const;
};

KktReport check_kkt(const QpProblem& p, const QpSolution& s);

struct QpWarmStart {
  Eigen::VectorXd z;        // feasible starting point; ignored if infeasible
  std::vector<int> active;  // working-set hint (indices into G rows)
};

// Primal active-set solver for dense strictly convex QPs.  The Hessian is
// factored once (H = L L') and the iteration runs in whitened coordinates
// v = L'z, where the Hessian is the identity.  Constraint rows live in a
// catalog of pre-whitened columns with a cached Gram matrix, so repeated
// solves that share H and constraint rows (branch-and-bound nodes, horizon
// re-solves) skip all factorization-dependent setup.
class ActiveSetQp {
 public:
  struct Options {
    double feas_tol = 1e-9;    // primal feasibility on inequalities
    double eq_tol = 1e-8;      // accepted equality residual of a start point
    double dual_tol = 1e-9;    // multiplier sign tolerance
    double step_tol = 1e-11;   // stationary-step detection (relative)
    double phase1_tol = 1e-4;  // slack above which phase-1 certifies infeasibility
    int max_iter_scale = 10;   // iteration cap = scale * (n + rows)
  };

  ActiveSetQp() = default;
  explicit ActiveSetQp(const Options& opts) : opts_(opts) {}

  const Options& options() const { return opts_; }

  // Factors H; throws std::invalid_argument if H is not positive definite
  // even after one 1e-9-scaled regularization retry.  Clears the catalog.
  void set_hessian(const Eigen::MatrixXd& H);
  double regularization() const { return reg_; }
  int dim() const { return n_; }

  // Registers constraint rows; returns the catalog id of the first row.
  // Rows whose leading `support_offset` entries are zero may pass the offset
  // to shorten the whitening solve.
  int add_rows(const Eigen::MatrixXd& rows, int support_offset = 0);
  int catalog_size() const { return int(rows_.size()); }

  // Linear cost used by solve_prepared; whitened once per call.
  void set_linear_cost(const Eigen::VectorXd& f);

  struct Prepared {
    std::vector<int> eq_ids;
    Eigen::VectorXd e;
    std::vector<int> ineq_ids;
    Eigen::VectorXd g;
  };

  // Solves with the current cost from a feasible start (throws
  // std::invalid_argument if z0 is not feasible).  warm_active holds
  // positions into prep.ineq_ids.  solution.active uses the same positions.
  QpSolution solve_prepared(const Prepared& prep, const Eigen::VectorXd& z0,
                            const std::vector<int>& warm_active = {});

  // General-purpose entry: finds a feasible point (phase-1) when the warm
  // start is absent or infeasible.  solution.active indexes rows of G.
  QpSolution solve(const Eigen::VectorXd& f, const Eigen::MatrixXd& E, const Eigen::VectorXd& e,
                   const Eigen::MatrixXd& G, const Eigen::VectorXd& g, const QpWarmStart* warm = nullptr);

 private:
  QpSolution run(const Prepared& prep, const Eigen::VectorXd& z0, const std::vector<int>& warm_active);
  bool find_feasible(const Eigen::MatrixXd& E, const Eigen::VectorXd& e, const Eigen::MatrixXd& G,
                     const Eigen::VectorXd& g, Eigen::VectorXd* z0) const;
  Eigen::VectorXd whiten_row(const Eigen::VectorXd& row, int support_offset) const;

  Options opts_;
  int n_ = 0;
  double reg_ = 0.0;
  Eigen::MatrixXd H_;      // original Hessian
  Eigen::MatrixXd L_;      // lower Cholesky factor of H_ + reg I
  Eigen::VectorXd f_;      // current linear cost
  Eigen::VectorXd f_v_;    // L^-1 f
  std::vector<Eigen::VectorXd> rows_;    // original constraint rows
  std::vector<Eigen::VectorXd> white_;   // L^-1 row'
  Eigen::MatrixXd gram_;                 // white' white, grown on demand
  int gram_cap_ = 0;
};

QpSolution solve_qp(const QpProblem& p, const QpWarmStart* warm = nullptr);

// Plain-text problem dump (dimension header + one row per line) and loader.
void dump_qp(const QpProblem& p, const std::string& path);
QpProblem load_qp_dump(const std::string& path);

}  // namespace pushmpc
