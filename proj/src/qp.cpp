#include "pushmpc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "pushmpc/csv.hpp"
#include "pushmpc/io.hpp"

namespace pushmpc {

void QpProblem::validate() const {
  int n = int(H.rows());
  if (H.cols() != n) throw std::invalid_argument("Hessian must be square");
  if (f.size() != n) throw std::invalid_argument("cost vector size mismatch");
  if (E.rows() != e.size() || (E.rows() > 0 && E.cols() != n)) {
    throw std::invalid_argument("equality constraint size mismatch");
  }
  if (G.rows() != g.size() || (G.rows() > 0 && G.cols() != n)) {
    throw std::invalid_argument("inequality constraint size mismatch");
  }
  double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw std::invalid_argument("Hessian must be symmetric");
  }
}

double KktReport::max_residual() const {
  return std::max({stationarity, primal_equality, primal_inequality, dual_feasibility, complementarity});
}

KktReport check_kkt(const QpProblem& p, const QpSolution& s) {
  KktReport r;
  Eigen::VectorXd grad = p.H * s.z + p.f;
  if (p.E.rows() > 0) grad += p.E.transpose() * s.lambda_eq;
  if (p.G.rows() > 0) grad += p.G.transpose() * s.mu_ineq;
  r.stationarity = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
  if (p.E.rows() > 0) r.primal_equality = (p.E * s.z - p.e).cwiseAbs().maxCoeff();
  if (p.G.rows() > 0) {
    Eigen::VectorXd slack = p.G * s.z - p.g;
    r.primal_inequality = std::max(0.0, slack.maxCoeff());
    r.complementarity = (s.mu_ineq.array() * slack.array()).abs().maxCoeff();
    r.dual_feasibility = std::max(0.0, -s.mu_ineq.minCoeff());
  }
  return r;
}

void ActiveSetQp::set_hessian(const Eigen::MatrixXd& H) {
  int n = int(H.rows());
  if (H.cols() != n || n == 0) throw std::invalid_argument("Hessian must be square and non-empty");
  double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw std::invalid_argument("Hessian must be symmetric");
  }
  H_ = 0.5 * (H + H.transpose());
  n_ = n;
  reg_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(H_);
  if (llt.info() != Eigen::Success) {
    reg_ = 1e-9 * scale;
    Eigen::MatrixXd Hr = H_ + reg_ * Eigen::MatrixXd::Identity(n, n);
    llt.compute(Hr);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("Hessian is not positive definite");
    }
  }
  L_ = llt.matrixL();
  rows_.clear();
  white_.clear();
  f_.resize(0);
  f_v_.resize(0);
}

Eigen::VectorXd ActiveSetQp::whiten_row(const Eigen::VectorXd& row, int support_offset) const {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n_);
  int tail = n_ - support_offset;
  y.tail(tail) = L_.bottomRightCorner(tail, tail)
                     .triangularView<Eigen::Lower>()
                     .solve(row.tail(tail));
  return y;
}

int ActiveSetQp::add_rows(const Eigen::MatrixXd& rows, int support_offset) {
  if (n_ == 0) throw std::logic_error("set_hessian must be called before add_rows");
  if (rows.cols() != n_) throw std::invalid_argument("constraint row dimension mismatch");
  int base = int(rows_.size());
  int total = base + int(rows.rows());
  if (total > gram_cap_) {
    int cap = std::max(64, gram_cap_);
    while (cap < total) cap *= 2;
    Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(cap, cap);
    if (base > 0) grown.topLeftCorner(base, base) = gram_.topLeftCorner(base, base);
    gram_ = std::move(grown);
    gram_cap_ = cap;
  }
  for (int r = 0; r < rows.rows(); ++r) {
    Eigen::VectorXd orig = rows.row(r).transpose();
    Eigen::VectorXd w = whiten_row(orig, support_offset);
    int id = int(rows_.size());
    rows_.push_back(std::move(orig));
    white_.push_back(std::move(w));
    for (int j = 0; j <= id; ++j) {
      double d = white_[id].dot(white_[j]);
      gram_(id, j) = d;
      gram_(j, id) = d;
    }
  }
  return base;
}

void ActiveSetQp::set_linear_cost(const Eigen::VectorXd& f) {
  if (f.size() != n_) throw std::invalid_argument("cost vector dimension mismatch");
  f_ = f;
  f_v_ = L_.triangularView<Eigen::Lower>().solve(f);
}

namespace {

// Incrementally maintained Cholesky factor of the working-set Gram matrix.
struct WorksetChol {
  Eigen::MatrixXd Lm;
  int k = 0;

  void reset(int cap) {
    if (Lm.rows() < cap) Lm = Eigen::MatrixXd::Zero(cap, cap);
    k = 0;
  }

  // Appends the row/column with self inner product `diag` and cross inner
  // products `cross` (length k); returns false when dependent.
  bool append(const Eigen::VectorXd& cross, double diag) {
    Eigen::VectorXd w = forward(cross);
    double piv2 = diag - w.squaredNorm();
    if (piv2 <= 1e-12 * std::max(diag, 1e-30)) return false;
    Lm.row(k).head(k) = w.transpose();
    Lm(k, k) = std::sqrt(piv2);
    ++k;
    return true;
  }

  // Appends with an externally measured pivot (used when the cancellation in
  // `append` is unreliable but an explicit residual proved independence).
  void append_pivot(const Eigen::VectorXd& cross, double pivot) {
    Eigen::VectorXd w = forward(cross);
    Lm.row(k).head(k) = w.transpose();
    Lm(k, k) = pivot;
    ++k;
  }

  Eigen::VectorXd forward(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd y(k);
    for (int i = 0; i < k; ++i) {
      double s = rhs(i);
      for (int j = 0; j < i; ++j) s -= Lm(i, j) * y(j);
      y(i) = s / Lm(i, i);
    }
    return y;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd y = forward(rhs);
    for (int i = k - 1; i >= 0; --i) {
      double s = y(i);
      for (int j = i + 1; j < k; ++j) s -= Lm(j, i) * y(j);
      y(i) = s / Lm(i, i);
    }
    return y;
  }
};

}  // namespace

QpSolution ActiveSetQp::solve_prepared(const Prepared& prep, const Eigen::VectorXd& z0,
                                       const std::vector<int>& warm_active) {
  return run(prep, z0, warm_active);
}

QpSolution ActiveSetQp::run(const Prepared& prep, const Eigen::VectorXd& z0,
                            const std::vector<int>& warm_active) {
  if (f_.size() != n_) throw std::logic_error("set_linear_cost must be called before solving");
  const int p = int(prep.eq_ids.size());
  const int q = int(prep.ineq_ids.size());
  const int cap = opts_.max_iter_scale * (n_ + q) + p + 1;

  Eigen::VectorXd v = L_.transpose().triangularView<Eigen::Upper>() * z0;

  // Start-point feasibility (callers provide feasible starts; small
  // violations from polishing are clamped onto the boundary).
  for (int i = 0; i < p; ++i) {
    if (std::abs(rows_[prep.eq_ids[i]].dot(z0) - prep.e(i)) > 100.0 * opts_.eq_tol) {
      throw std::invalid_argument("start point violates equality constraints");
    }
  }
  Eigen::VectorXd vals(q);
  for (int i = 0; i < q; ++i) {
    double val = rows_[prep.ineq_ids[i]].dot(z0) - prep.g(i);
    if (val > 100.0 * opts_.feas_tol) {
      throw std::invalid_argument("start point violates inequality constraints");
    }
    vals(i) = std::min(val, 0.0);
  }

  // Working set: equality block first, then active inequalities.
  std::vector<int> work;  // positions into prep.ineq_ids
  std::vector<char> in_w(q, 0);
  std::vector<char> skip(q, 0);  // dependent blockers, ignored until the set changes
  std::vector<int> ids;
  WorksetChol chol;
  chol.reset(p + q + 1);
  Eigen::VectorXd cross(p + q + 1);

  // Adds catalog row `id` to the factor.  When the Gram-based pivot is lost
  // to cancellation, measures the orthogonal component explicitly (with one
  // reorthogonalization pass) before declaring the row dependent.
  auto try_add = [&](int id) {
    int k = int(ids.size());
    for (int j = 0; j < k; ++j) cross(j) = gram_(id, ids[j]);
    if (chol.append(cross.head(k), gram_(id, id))) return true;
    if (k == 0) return false;  // zero row
    Eigen::VectorXd resid = white_[id];
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::VectorXd proj(k);
      for (int j = 0; j < k; ++j) proj(j) = white_[ids[j]].dot(resid);
      Eigen::VectorXd coef = chol.solve(proj);
      for (int j = 0; j < k; ++j) resid -= coef(j) * white_[ids[j]];
    }
    double rho = resid.norm();
    if (rho <= 1e-10 * std::sqrt(gram_(id, id))) return false;
    chol.append_pivot(cross.head(k), rho);
    return true;
  };
  for (int id : prep.eq_ids) {
    if (!try_add(id)) {
      throw std::invalid_argument("equality constraints are linearly dependent");
    }
    ids.push_back(id);
  }
  for (int pos : warm_active) {
    if (pos < 0 || pos >= q || in_w[pos]) continue;
    if (std::abs(vals(pos)) > 1e-7) continue;
    int id = prep.ineq_ids[pos];
    if (try_add(id)) {
      ids.push_back(id);
      work.push_back(pos);
      in_w[pos] = 1;
    }
  }

  QpSolution sol;
  sol.status = QpStatus::MaxIter;
  Eigen::VectorXd r_v(n_), d_v(n_), dirs(q);
  Eigen::VectorXd lam;

  const bool trace = std::getenv("PUSHMPC_QP_TRACE") != nullptr;
  int iters = 0;
  bool at_eqp_min = false;  // last step was full and unblocked
  while (true) {
    if (++iters > cap) {
      sol.status = QpStatus::MaxIter;
      break;
    }
    r_v = v + f_v_;
    int k = int(ids.size());
    Eigen::VectorXd rhs(k);
    for (int j = 0; j < k; ++j) rhs(j) = white_[ids[j]].dot(r_v);
    lam = chol.solve(rhs);
    d_v = -r_v;
    for (int j = 0; j < k; ++j) d_v += lam(j) * white_[ids[j]];

    double dnorm = d_v.lpNorm<Eigen::Infinity>();
    // The step is the residual of a projection of r_v, so its numerical
    // noise floor scales with |r_v|; the test must use the same scale.
    // After a full unblocked step the iterate sits at the minimum over the
    // current working set by construction, whatever the rounding noise says.
    double step_scale = 1.0 + std::max(v.lpNorm<Eigen::Infinity>(), r_v.lpNorm<Eigen::Infinity>());
    if (at_eqp_min || dnorm <= opts_.step_tol * step_scale) {
      at_eqp_min = false;
      // Stationary on the working set: check inequality multipliers
      // (stationarity gives Hz + f = sum lam_j row_j, so mu = -lam).
      int drop = -1;
      double worst = -opts_.dual_tol;
      for (size_t j = 0; j < work.size(); ++j) {
        double mu = -lam(p + long(j));
        if (mu < worst) {
          worst = mu;
          drop = int(j);
        }
      }
      if (drop < 0) {
        sol.status = QpStatus::Optimal;
        break;
      }
      if (trace) std::fprintf(stderr, "it %d drop pos %d mu %.3e\n", iters, work[size_t(drop)], worst);
      in_w[work[size_t(drop)]] = 0;
      work.erase(work.begin() + drop);
      ids.erase(ids.begin() + p + drop);
      std::fill(skip.begin(), skip.end(), 0);
      // Rebuild the factor without the dropped row.
      std::vector<int> rebuilt = std::move(ids);
      ids.clear();
      chol.k = 0;
      for (int id : rebuilt) {
        if (!try_add(id)) throw std::logic_error("working set became degenerate");
        ids.push_back(id);
      }
      continue;
    }

    double dnorm2 = d_v.norm();
    double alpha = 1.0;
    int blocker = -1;
    for (int pos = 0; pos < q; ++pos) {
      if (in_w[pos]) {
        dirs(pos) = 0.0;
        continue;
      }
      double dir = white_[prep.ineq_ids[pos]].dot(d_v);
      dirs(pos) = dir;
      if (skip[pos]) continue;
      double tol = 1e-12 * std::max(1.0, std::sqrt(gram_(prep.ineq_ids[pos], prep.ineq_ids[pos])) * dnorm2);
      if (dir > tol) {
        double a = std::max(0.0, -vals(pos) / dir);
        if (a < alpha) {
          alpha = a;
          blocker = pos;
        }
      }
    }
    v += alpha * d_v;
    for (int pos = 0; pos < q; ++pos) {
      if (!in_w[pos]) vals(pos) = std::min(vals(pos) + alpha * dirs(pos), 0.0);
    }
    if (trace) std::fprintf(stderr, "it %d step alpha %.3e dnorm %.3e blocker %d\n", iters, alpha, dnorm, blocker);
    if (blocker >= 0) {
      vals(blocker) = 0.0;
      if (try_add(prep.ineq_ids[blocker])) {
        ids.push_back(prep.ineq_ids[blocker]);
        work.push_back(blocker);
        in_w[blocker] = 1;
        std::fill(skip.begin(), skip.end(), 0);
      } else {
        // The blocker is linearly dependent on the working set, so the exact
        // step cannot cross it; the positive directional derivative is
        // rounding noise.  Leave it tight and ignore it until the working
        // set changes shape.
        skip[blocker] = 1;
      }
    } else if (alpha == 1.0) {
      at_eqp_min = true;
    }
  }

  // Assemble the solution in the original coordinates.
  sol.z = L_.transpose().triangularView<Eigen::Upper>().solve(v);
  sol.iterations = iters;
  sol.regularization = reg_;
  sol.objective = 0.5 * sol.z.dot(H_ * sol.z) + f_.dot(sol.z);
  sol.lambda_eq = Eigen::VectorXd::Zero(p);
  sol.mu_ineq = Eigen::VectorXd::Zero(q);
  int k = int(ids.size());
  if (lam.size() == k) {
    for (int j = 0; j < p; ++j) sol.lambda_eq(j) = -lam(j);
    for (size_t j = 0; j < work.size(); ++j) sol.mu_ineq(work[j]) = -lam(p + long(j));
  }
  sol.active = work;
  std::sort(sol.active.begin(), sol.active.end());

  // KKT residuals against the original rows.
  Eigen::VectorXd grad = H_ * sol.z + f_;
  for (int j = 0; j < p; ++j) grad += sol.lambda_eq(j) * rows_[prep.eq_ids[j]];
  for (size_t j = 0; j < work.size(); ++j) {
    grad += sol.mu_ineq(work[j]) * rows_[prep.ineq_ids[work[j]]];
  }
  double stat = grad.cwiseAbs().maxCoeff();
  double prim = 0.0;
  for (int i = 0; i < p; ++i) prim = std::max(prim, std::abs(rows_[prep.eq_ids[i]].dot(sol.z) - prep.e(i)));
  double prim_in = 0.0;
  double compl_res = 0.0;
  for (int i = 0; i < q; ++i) {
    double val = rows_[prep.ineq_ids[i]].dot(sol.z) - prep.g(i);
    prim_in = std::max(prim_in, val);
    compl_res = std::max(compl_res, std::abs(sol.mu_ineq(i) * val));
  }
  double dual = sol.mu_ineq.size() > 0 ? std::max(0.0, -sol.mu_ineq.minCoeff()) : 0.0;
  sol.kkt_residual = std::max({stat, prim, std::max(0.0, prim_in), dual, compl_res});
  return sol;
}

bool ActiveSetQp::find_feasible(const Eigen::MatrixXd& E, const Eigen::VectorXd& e,
                                const Eigen::MatrixXd& G, const Eigen::VectorXd& g,
                                Eigen::VectorXd* z0) const {
  int n = int(E.cols() > 0 ? E.cols() : G.cols());
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  if (E.rows() > 0) {
    z = E.completeOrthogonalDecomposition().solve(e);
    if ((E * z - e).cwiseAbs().maxCoeff() > opts_.eq_tol) return false;
  }
  int q = int(G.rows());
  Eigen::VectorXd viol = q > 0 ? (G * z - g).cwiseMax(0.0).eval() : Eigen::VectorXd();
  if (q == 0 || viol.maxCoeff() <= opts_.feas_tol) {
    *z0 = z;
    return true;
  }

  // Phase-1: minimize the violation slacks.  The slack cost is linear so
  // that the s >= 0 rows bind and the slacks vanish exactly whenever the
  // region is nonempty; a tiny quadratic term keeps the problem strictly
  // convex.  The slacks scale with the row norms of G, so normalize the
  // linear cost to make the threshold meaningful across problem scales.
  const double eps = 1e-6;
  double row_scale = std::max(1.0, G.cwiseAbs().maxCoeff());
  int n1 = n + q;
  Eigen::MatrixXd H1 = eps * Eigen::MatrixXd::Identity(n1, n1);
  Eigen::VectorXd f1 = Eigen::VectorXd::Zero(n1);
  f1.head(n) = -eps * z;
  f1.tail(q).setConstant(row_scale);
  Eigen::MatrixXd E1(E.rows(), n1);
  if (E.rows() > 0) {
    E1 << E, Eigen::MatrixXd::Zero(E.rows(), q);
  }
  Eigen::MatrixXd G1 = Eigen::MatrixXd::Zero(2 * q, n1);
  G1.topLeftCorner(q, n) = G;
  G1.block(0, n, q, q) = -Eigen::MatrixXd::Identity(q, q);
  G1.block(q, n, q, q) = -Eigen::MatrixXd::Identity(q, q);
  Eigen::VectorXd g1(2 * q);
  g1 << g, Eigen::VectorXd::Zero(q);

  Eigen::VectorXd start(n1);
  start.head(n) = z;
  start.tail(q) = viol.array() + 1.0;

  ActiveSetQp sub(opts_);
  QpWarmStart warm;
  warm.z = start;
  sub.set_hessian(H1);
  QpSolution s1 = sub.solve(f1, E1, e, G1, g1, &warm);
  if (s1.z.size() != n1) return false;
  // A distinctly positive slack certifies infeasibility; small residual
  // slack can be an artifact of an ill-conditioned working set, so the
  // polished violation below is the arbiter near zero.
  Eigen::VectorXd slack = s1.z.tail(q);
  if (slack.maxCoeff() > opts_.phase1_tol) return false;
  Eigen::VectorXd cand = s1.z.head(n);

  // Polish onto the near-active boundary to remove the residual slack.
  for (int round = 0; round < 2; ++round) {
    std::vector<int> tight;
    Eigen::VectorXd resid_g = G * cand - g;
    for (int i = 0; i < q; ++i) {
      if (resid_g(i) >= -std::max(opts_.eq_tol, 10.0 * slack.maxCoeff())) tight.push_back(i);
    }
    Eigen::MatrixXd M(E.rows() + long(tight.size()), n);
    Eigen::VectorXd resid(M.rows());
    if (E.rows() > 0) {
      M.topRows(E.rows()) = E;
      resid.head(E.rows()) = e - E * cand;
    }
    for (size_t i = 0; i < tight.size(); ++i) {
      M.row(E.rows() + long(i)) = G.row(tight[i]);
      resid(E.rows() + long(i)) = g(tight[i]) - cand.dot(G.row(tight[i]));
    }
    if (M.rows() > 0) cand += M.completeOrthogonalDecomposition().solve(resid);
    double worst = (G * cand - g).maxCoeff();
    double eq_res = E.rows() > 0 ? (E * cand - e).cwiseAbs().maxCoeff() : 0.0;
    if (worst <= opts_.feas_tol && eq_res <= opts_.eq_tol) {
      *z0 = cand;
      return true;
    }
    if (round == 1 && worst <= 10.0 * opts_.feas_tol && eq_res <= 10.0 * opts_.eq_tol) {
      *z0 = cand;
      return true;
    }
  }
  return false;
}

QpSolution ActiveSetQp::solve(const Eigen::VectorXd& f, const Eigen::MatrixXd& E, const Eigen::VectorXd& e,
                              const Eigen::MatrixXd& G, const Eigen::VectorXd& g, const QpWarmStart* warm) {
  int base = int(rows_.size());
  Prepared prep;
  if (E.rows() > 0) {
    int b = add_rows(E);
    for (int i = 0; i < E.rows(); ++i) prep.eq_ids.push_back(b + i);
  }
  prep.e = e;
  if (G.rows() > 0) {
    int b = add_rows(G);
    for (int i = 0; i < G.rows(); ++i) prep.ineq_ids.push_back(b + i);
  }
  prep.g = g;
  set_linear_cost(f);

  auto cleanup = [&]() {
    rows_.resize(size_t(base));
    white_.resize(size_t(base));
  };

  Eigen::VectorXd z0;
  std::vector<int> warm_active;
  bool have_start = false;
  if (warm && warm->z.size() == n_) {
    double eq_res = E.rows() > 0 ? (E * warm->z - e).cwiseAbs().maxCoeff() : 0.0;
    double in_res = G.rows() > 0 ? (G * warm->z - g).maxCoeff() : 0.0;
    if (eq_res <= opts_.eq_tol && in_res <= opts_.feas_tol) {
      z0 = warm->z;
      warm_active = warm->active;
      have_start = true;
    }
  }
  if (!have_start) {
    if (!find_feasible(E, e, G, g, &z0)) {
      cleanup();
      QpSolution sol;
      sol.status = QpStatus::Infeasible;
      sol.regularization = reg_;
      return sol;
    }
  }
  QpSolution sol = run(prep, z0, warm_active);
  cleanup();
  return sol;
}

QpSolution solve_qp(const QpProblem& p, const QpWarmStart* warm) {
  p.validate();
  ActiveSetQp solver;
  solver.set_hessian(p.H);
  return solver.solve(p.f, p.E, p.e, p.G, p.g, warm);
}

namespace {

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix(std::istream& in, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      std::string tok;
      if (!(in >> tok)) throw std::runtime_error("truncated matrix block");
      m(i, j) = parse_double(tok);
    }
  }
  return m;
}

}  // namespace

void dump_qp(const QpProblem& p, const std::string& path) {
  std::ostringstream out;
  out << "pushmpc-qp 1\n";
  out << p.dim() << ' ' << p.E.rows() << ' ' << p.G.rows() << '\n';
  write_matrix(out, p.H);
  write_matrix(out, p.f.transpose());
  write_matrix(out, p.E);
  write_matrix(out, p.e.transpose());
  write_matrix(out, p.G);
  write_matrix(out, p.g.transpose());
  atomic_write_file(path, out.str());
}

QpProblem load_qp_dump(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string magic, version;
  in >> magic >> version;
  if (magic != "pushmpc-qp" || version != "1") {
    throw std::runtime_error("not a QP dump file: " + path);
  }
  int n = 0, p = 0, q = 0;
  in >> n >> p >> q;
  QpProblem prob;
  prob.H = read_matrix(in, n, n);
  prob.f = read_matrix(in, 1, n).transpose();
  prob.E = read_matrix(in, p, n);
  prob.e = p > 0 ? read_matrix(in, 1, p).transpose() : Eigen::VectorXd(0);
  prob.G = read_matrix(in, q, n);
  prob.g = q > 0 ? read_matrix(in, 1, q).transpose() : Eigen::VectorXd(0);
  return prob;
}

}  // namespace pushmpc
