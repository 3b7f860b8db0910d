#include "ripforge/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "ripforge/symbasis.hpp"

namespace ripforge {

namespace {

// Internal problem form: empty objective/constraint pieces expanded to dense
// zeros, equality rows orthonormalized, scalar directions packed per block.

struct PBox {
  double sign = 1.0;
  double offset = 0.0;
  Eigen::VectorXd w;  // num_scalars
};

struct PMap {
  int size = 0;
  Eigen::MatrixXd map_h;  // 0x0 when the block does not touch H
  Eigen::VectorXd c0;
  Eigen::MatrixXd dirs;  // sym_dim(size) x num_scalars (0 cols when no scalars)
};

struct Prepared {
  int h_dim = 0;
  int d_h = 0;
  int num_scalars = 0;
  int d = 0;
  double nu = 0.0;  // total cone dimension (barrier parameter)
  Eigen::VectorXd c;
  Eigen::MatrixXd eq;      // r x d with orthonormal rows (r == 0 when none)
  Eigen::VectorXd eq_rhs;  // r
  bool eq_consistent = true;
  std::vector<PBox> box;
  std::vector<PMap> mapped;
};

Prepared prepare(const SdpProblem& p) {
  p.validate();
  Prepared out;
  out.h_dim = p.h_dim;
  out.d_h = p.d_h();
  out.num_scalars = p.num_scalars;
  out.d = out.d_h + out.num_scalars;

  out.c = Eigen::VectorXd::Zero(out.d);
  if (p.obj_h.size() > 0) out.c.head(out.d_h) = p.obj_h;
  if (p.obj_scalars.size() > 0) out.c.tail(out.num_scalars) = p.obj_scalars;

  for (const auto& b : p.box_blocks) {
    PBox pb;
    pb.sign = b.sign;
    pb.offset = b.offset;
    pb.w = Eigen::VectorXd::Zero(out.num_scalars);
    if (b.scalar_coeffs.size() > 0) pb.w = b.scalar_coeffs;
    out.box.push_back(std::move(pb));
    out.nu += p.h_dim;
  }
  for (const auto& mb : p.mapped_blocks) {
    PMap pm;
    pm.size = mb.size;
    pm.map_h = mb.map_h;
    const int sd = sym_dim(mb.size);
    pm.c0 = (mb.const_part.size() > 0) ? mb.const_part
                                       : Eigen::VectorXd::Zero(sd);
    pm.dirs = Eigen::MatrixXd::Zero(sd, out.num_scalars);
    if (!mb.scalar_dirs.empty()) {
      for (int j = 0; j < out.num_scalars; ++j) {
        if (mb.scalar_dirs[j].size() > 0) pm.dirs.col(j) = mb.scalar_dirs[j];
      }
    }
    out.mapped.push_back(std::move(pm));
    out.nu += mb.size;
  }

  const int m_eq = static_cast<int>(p.eq_rhs.size());
  if (m_eq > 0) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(m_eq, out.d);
    if (p.eq_h.size() > 0) e.leftCols(out.d_h) = p.eq_h;
    if (p.eq_scalars.size() > 0) e.rightCols(out.num_scalars) = p.eq_scalars;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        e, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sig = svd.singularValues();
    const double smax = (sig.size() > 0) ? sig(0) : 0.0;
    int rank = 0;
    for (int i = 0; i < sig.size(); ++i) {
      if (sig(i) > 1e-12 * std::max(smax, 1.0)) ++rank;
    }
    if (rank > 0) {
      out.eq = svd.matrixV().leftCols(rank).transpose();
      out.eq_rhs = sig.head(rank).cwiseInverse().asDiagonal() *
                   (svd.matrixU().leftCols(rank).transpose() * p.eq_rhs);
      const Eigen::VectorXd least_sq = out.eq.transpose() * out.eq_rhs;
      out.eq_consistent =
          (e * least_sq - p.eq_rhs).lpNorm<Eigen::Infinity>() <=
          1e-9 * (1.0 + p.eq_rhs.lpNorm<Eigen::Infinity>());
    } else {
      out.eq_consistent = p.eq_rhs.lpNorm<Eigen::Infinity>() <= 1e-12;
    }
  }
  return out;
}

Eigen::MatrixXd box_matrix(const Prepared& pr, const PBox& b,
                           const Eigen::VectorXd& v) {
  Eigen::MatrixXd s = b.sign * smat(v.head(pr.d_h), pr.h_dim);
  double shift = b.offset;
  if (pr.num_scalars > 0) shift += b.w.dot(v.tail(pr.num_scalars));
  s.diagonal().array() += shift;
  return s;
}

Eigen::MatrixXd mapped_matrix(const Prepared& pr, const PMap& m,
                              const Eigen::VectorXd& v) {
  Eigen::VectorXd sv = m.c0;
  if (m.map_h.size() > 0) sv += m.map_h * v.head(pr.d_h);
  if (pr.num_scalars > 0) sv += m.dirs * v.tail(pr.num_scalars);
  return smat(sv, m.size);
}

struct Eval {
  bool feasible = false;
  double barrier = 0.0;  // -sum_k logdet S_k
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llts;
  std::vector<int> sizes;
};

Eval evaluate(const Prepared& pr, const Eigen::VectorXd& v, bool keep) {
  Eval ev;
  if (!v.allFinite()) return ev;
  auto account = [&](Eigen::MatrixXd s) -> bool {
    if (!s.allFinite()) return false;
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) return false;
    double logdet = 0.0;
    const auto& l = llt.matrixLLT();
    for (int i = 0; i < s.rows(); ++i) {
      if (!(l(i, i) > 0.0)) return false;
      logdet += 2.0 * std::log(l(i, i));
    }
    ev.barrier -= logdet;
    if (keep) {
      ev.sizes.push_back(static_cast<int>(s.rows()));
      ev.llts.push_back(std::move(llt));
    }
    return true;
  };
  for (const auto& b : pr.box) {
    if (!account(box_matrix(pr, b, v))) return ev;
  }
  for (const auto& m : pr.mapped) {
    if (!account(mapped_matrix(pr, m, v))) return ev;
  }
  ev.feasible = true;
  return ev;
}

// Gradient and Hessian of the barrier -sum logdet S_k at the point backing ev.
void barrier_derivatives(const Prepared& pr, const Eval& ev, Eigen::VectorXd& g,
                         Eigen::MatrixXd& gmat) {
  const int dh = pr.d_h;
  const int ns = pr.num_scalars;
  g.setZero(pr.d);
  gmat.setZero(pr.d, pr.d);
  int bi = 0;
  for (const auto& b : pr.box) {
    const Eigen::MatrixXd sinv = ev.llts[bi].solve(
        Eigen::MatrixXd::Identity(pr.h_dim, pr.h_dim));
    const Eigen::VectorXd sv = svec(sinv);
    const Eigen::MatrixXd sinv2 = sinv * sinv;
    g.head(dh) -= b.sign * sv;
    gmat.topLeftCorner(dh, dh) += sym_kronecker(sinv);
    if (ns > 0) {
      const double tr1 = sinv.trace();
      const double tr2 = sinv2.trace();
      const Eigen::VectorXd sv2 = svec(sinv2);
      for (int j = 0; j < ns; ++j) {
        if (b.w(j) == 0.0) continue;
        g(dh + j) -= b.w(j) * tr1;
        gmat.block(0, dh + j, dh, 1) += b.sign * b.w(j) * sv2;
        gmat.block(dh + j, 0, 1, dh) += b.sign * b.w(j) * sv2.transpose();
        for (int k = 0; k < ns; ++k) {
          if (b.w(k) != 0.0) gmat(dh + j, dh + k) += b.w(j) * b.w(k) * tr2;
        }
      }
    }
    ++bi;
  }
  for (const auto& m : pr.mapped) {
    const Eigen::MatrixXd sinv =
        ev.llts[bi].solve(Eigen::MatrixXd::Identity(m.size, m.size));
    const Eigen::VectorXd sv = svec(sinv);
    const Eigen::MatrixXd k = sym_kronecker(sinv);
    const bool has_h = m.map_h.size() > 0;
    if (has_h) g.head(dh) -= m.map_h.transpose() * sv;
    if (ns > 0) g.tail(ns) -= m.dirs.transpose() * sv;
    if (has_h) {
      const Eigen::MatrixXd km = k * m.map_h;
      gmat.topLeftCorner(dh, dh).noalias() += m.map_h.transpose() * km;
      if (ns > 0) {
        const Eigen::MatrixXd cross = km.transpose() * m.dirs;  // dh x ns
        gmat.topRightCorner(dh, ns) += cross;
        gmat.bottomLeftCorner(ns, dh) += cross.transpose();
      }
    }
    if (ns > 0) {
      gmat.bottomRightCorner(ns, ns).noalias() +=
          m.dirs.transpose() * (k * m.dirs);
    }
    ++bi;
  }
  gmat = 0.5 * (gmat + gmat.transpose()).eval();
}

// Equality-projected damped Newton direction; adds a tiny ridge if the
// Hessian factorization hits numerical trouble.
bool newton_direction(const Prepared& pr, const Eigen::VectorXd& grad,
                      const Eigen::MatrixXd& gmat, Eigen::VectorXd& delta) {
  const double base = std::max(gmat.diagonal().cwiseAbs().maxCoeff(), 1.0);
  double ridge = 0.0;
  for (int attempt = 0; attempt < 5; ++attempt) {
    Eigen::MatrixXd gr = gmat;
    if (ridge > 0.0) gr.diagonal().array() += ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(gr);
    if (llt.info() == Eigen::Success) {
      if (pr.eq.rows() == 0) {
        delta = -llt.solve(grad);
      } else {
        const Eigen::VectorXd a = llt.solve(grad);
        const Eigen::MatrixXd b = llt.solve(pr.eq.transpose());
        const Eigen::MatrixXd se = pr.eq * b;
        const Eigen::VectorXd lambda =
            Eigen::LDLT<Eigen::MatrixXd>(se).solve(pr.eq * a);
        delta = -(a - b * lambda);
      }
      if (delta.allFinite()) return true;
    }
    ridge = (ridge == 0.0) ? 1e-12 * base : ridge * 100.0;
  }
  return false;
}

void reproject(const Prepared& pr, Eigen::VectorXd& v) {
  if (pr.eq.rows() > 0) v -= pr.eq.transpose() * (pr.eq * v - pr.eq_rhs);
}

double min_cone_margin(const Prepared& pr, const Eigen::VectorXd& v) {
  double mm = std::numeric_limits<double>::infinity();
  for (const auto& b : pr.box) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        box_matrix(pr, b, v), Eigen::EigenvaluesOnly);
    mm = std::min(mm, es.eigenvalues().minCoeff());
  }
  for (const auto& m : pr.mapped) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        mapped_matrix(pr, m, v), Eigen::EigenvaluesOnly);
    mm = std::min(mm, es.eigenvalues().minCoeff());
  }
  return mm;
}

enum class RunStop { converged, early, stalled, max_steps };

struct RunOutcome {
  RunStop stop = RunStop::stalled;
  int probe_signal = 0;
  double last_gap = std::numeric_limits<double>::infinity();
};

// probe(v, gap): gap is +inf after an ordinary Newton step and the duality-gap
// bound nu/t right after a centering completes. Return +1/-1 to stop early.
RunOutcome path_follow(
    const Prepared& pr, Eigen::VectorXd& v, const SolveOptions& opts,
    int& budget, double gap_target,
    const std::function<int(const Eigen::VectorXd&, double)>& probe,
    std::ostream* trace, const char* phase, int& total_steps) {
  RunOutcome out;
  const bool zero_objective = (pr.c.norm() == 0.0);
  const double inf = std::numeric_limits<double>::infinity();
  double t = opts.t_initial;

  Eigen::VectorXd g, gradphi, delta;
  Eigen::MatrixXd gmat;

  // Snapshot of the most recent completed centering.  When progress stalls
  // (numerically singular Newton system or a dead line search, which happens
  // once the barrier Hessian outruns double precision), we fall back to this
  // point: it carries the rigorous nu / t suboptimality bound in last_gap,
  // whereas a half-stepped iterate carries none.
  Eigen::VectorXd v_center;
  bool have_center = false;
  const auto stall = [&](RunOutcome& o) -> RunOutcome& {
    if (have_center) v = v_center;
    return o;
  };

  while (true) {
    // Center at the current t.
    bool centered = false;
    while (budget > 0) {
      Eval ev = evaluate(pr, v, true);
      if (!ev.feasible) return stall(out);  // lost feasibility: defensive
      barrier_derivatives(pr, ev, g, gmat);
      gradphi = g - t * pr.c;
      if (!newton_direction(pr, gradphi, gmat, delta)) return stall(out);
      const double slope = gradphi.dot(delta);
      const double dec = std::max(0.0, -slope);
      if (trace) {
        *trace << phase << ',' << total_steps << ',' << t << ','
               << pr.c.dot(v) << ','
               << (pr.eq.rows() > 0
                       ? (pr.eq * v - pr.eq_rhs).lpNorm<Eigen::Infinity>()
                       : 0.0)
               << ',' << min_cone_margin(pr, v) << '\n';
      }
      if (0.5 * dec <= 1e-9) {
        centered = true;
        break;
      }
      const double phi0 = -t * pr.c.dot(v) + ev.barrier;
      double step = 1.0;
      bool accepted = false;
      while (step > 1e-14) {
        Eigen::VectorXd vt = v + step * delta;
        Eval et = evaluate(pr, vt, false);
        if (et.feasible) {
          const double phit = -t * pr.c.dot(vt) + et.barrier;
          if (phit <= phi0 + 0.25 * step * slope) {
            v = std::move(vt);
            accepted = true;
            break;
          }
        }
        step *= 0.5;
      }
      if (!accepted) return stall(out);
      reproject(pr, v);
      --budget;
      ++total_steps;
      const int sig = probe(v, inf);
      if (sig != 0) {
        out.stop = RunStop::early;
        out.probe_signal = sig;
        return out;
      }
    }
    if (!centered) {
      out.stop = RunStop::max_steps;
      return out;
    }
    v_center = v;
    have_center = true;
    const double gap = pr.nu / t;
    out.last_gap = gap;
    const int sig = probe(v, gap);
    if (sig != 0) {
      out.stop = RunStop::early;
      out.probe_signal = sig;
      return out;
    }
    if (zero_objective || gap <= gap_target) {
      out.stop = RunStop::converged;
      return out;
    }
    t *= opts.t_factor;
  }
}

Eigen::VectorXd start_point(const Prepared& pr) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(pr.d);
  v.head(pr.d_h) = 0.5 * svec_identity(pr.h_dim);
  if (pr.num_scalars > 0) v.tail(pr.num_scalars).setConstant(0.25);
  reproject(pr, v);
  return v;
}

struct PhaseOneResult {
  bool decided = false;     // margin question answered within budget
  bool feasible = false;    // answer when decided
  Eigen::VectorXd v;        // witness (original variables) when feasible
  double margin = 0.0;      // measured margin of witness, or upper bound
  RunStop stop = RunStop::stalled;
};

// Maximize the uniform margin m with every block shifted to S_k - m I >= 0.
// Early-exits once m >= accept_at (feasible) or once a centered point proves
// the optimal margin is below reject_below (infeasible).
PhaseOneResult phase_one(const Prepared& pr, const Eigen::VectorXd& v0,
                         double accept_at, double reject_below,
                         const SolveOptions& opts, int& budget,
                         std::ostream* trace, int& total_steps) {
  Prepared aug = pr;
  const int mi = aug.num_scalars;  // index of the new margin scalar
  aug.num_scalars += 1;
  aug.d += 1;
  aug.nu += 1.0;
  aug.c = Eigen::VectorXd::Zero(aug.d);
  aug.c(aug.d_h + mi) = 1.0;
  for (auto& b : aug.box) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(aug.num_scalars);
    w.head(mi) = b.w;
    w(mi) = -1.0;
    b.w = std::move(w);
  }
  for (auto& m : aug.mapped) {
    Eigen::MatrixXd dirs(m.dirs.rows(), aug.num_scalars);
    dirs.leftCols(mi) = m.dirs;
    dirs.col(mi) = -svec_identity(m.size);
    m.dirs = std::move(dirs);
  }
  double cap = 10.0;
  for (const auto& b : pr.box) cap = std::max(cap, 10.0 * std::abs(b.offset));
  for (const auto& m : pr.mapped) {
    if (m.c0.size() > 0)
      cap = std::max(cap, 10.0 * m.c0.lpNorm<Eigen::Infinity>());
  }
  PMap capblock;
  capblock.size = 1;
  capblock.c0 = Eigen::VectorXd::Constant(1, cap);
  capblock.dirs = Eigen::MatrixXd::Zero(1, aug.num_scalars);
  capblock.dirs(0, mi) = -1.0;
  aug.mapped.push_back(std::move(capblock));
  aug.nu += 1.0;
  if (aug.eq.rows() > 0) {
    Eigen::MatrixXd eq(aug.eq.rows(), aug.d);
    eq.leftCols(aug.d - 1) = aug.eq;
    eq.col(aug.d - 1).setZero();
    aug.eq = std::move(eq);
  }

  const double m0raw = min_cone_margin(pr, v0);
  const double m0 = m0raw - 0.1 * (1.0 + std::abs(m0raw));
  Eigen::VectorXd v(aug.d);
  v.head(aug.d - 1) = v0;
  v(aug.d - 1) = std::min(m0, 0.5 * cap);

  const double slack = std::max(10.0 * opts.tol, 1e-12);
  auto probe = [&](const Eigen::VectorXd& vv, double gap) -> int {
    const double m = vv(aug.d - 1);
    if (m >= accept_at + slack) return 1;
    if (std::isfinite(gap) && m + gap < reject_below - slack) return -1;
    return 0;
  };

  RunOutcome run = path_follow(aug, v, opts, budget, opts.tol, probe, trace,
                               "phase1", total_steps);
  PhaseOneResult res;
  res.stop = run.stop;
  const double m_final = v(aug.d - 1);
  if (run.stop == RunStop::early) {
    res.decided = true;
    res.feasible = (run.probe_signal > 0);
    if (res.feasible) {
      res.v = v.head(aug.d - 1);
      res.margin = min_cone_margin(pr, res.v);
    } else {
      res.margin = m_final + run.last_gap;
    }
    return res;
  }
  if (run.stop == RunStop::converged || run.stop == RunStop::stalled) {
    // Optimal (or best found) margin is m_final up to the achieved gap.
    res.decided = (run.stop == RunStop::converged);
    res.feasible = (m_final >= reject_below);
    res.v = v.head(aug.d - 1);
    res.margin = min_cone_margin(pr, res.v);
    if (run.stop == RunStop::stalled) {
      if (res.margin >= reject_below) {
        res.decided = true;  // a witness in hand settles the question
      } else if (std::isfinite(run.last_gap) &&
                 m_final + run.last_gap < reject_below - slack) {
        // On stall v is the last centered point, so the optimal margin is at
        // most m_final + last_gap; that bound rules feasibility out.
        res.decided = true;
        res.feasible = false;
        res.margin = m_final + run.last_gap;
      }
    }
    return res;
  }
  return res;  // max_steps: undecided
}

double original_eq_violation(const SdpProblem& p, const Eigen::VectorXd& h,
                             const Eigen::VectorXd& s) {
  const int m_eq = static_cast<int>(p.eq_rhs.size());
  if (m_eq == 0) return 0.0;
  Eigen::VectorXd r = -p.eq_rhs;
  if (p.eq_h.size() > 0) r += p.eq_h * h;
  if (p.eq_scalars.size() > 0) r += p.eq_scalars * s;
  return r.lpNorm<Eigen::Infinity>();
}

}  // namespace

void SdpProblem::validate() const {
  if (h_dim < 1) throw std::invalid_argument("sdp: h_dim must be positive");
  if (num_scalars < 0) throw std::invalid_argument("sdp: bad num_scalars");
  const int dh = d_h();
  if (obj_h.size() != 0 && obj_h.size() != dh)
    throw std::invalid_argument("sdp: obj_h size mismatch");
  if (obj_scalars.size() != 0 && obj_scalars.size() != num_scalars)
    throw std::invalid_argument("sdp: obj_scalars size mismatch");
  const int m_eq = static_cast<int>(eq_rhs.size());
  if (eq_h.size() > 0 && (eq_h.rows() != m_eq || eq_h.cols() != dh))
    throw std::invalid_argument("sdp: eq_h shape mismatch");
  if (eq_scalars.size() > 0 &&
      (eq_scalars.rows() != m_eq || eq_scalars.cols() != num_scalars))
    throw std::invalid_argument("sdp: eq_scalars shape mismatch");
  if (box_blocks.empty())
    throw std::invalid_argument(
        "sdp: needs at least one identity-coupled block to pin H");
  for (const auto& b : box_blocks) {
    if (b.sign != 1.0 && b.sign != -1.0)
      throw std::invalid_argument("sdp: box sign must be +1 or -1");
    if (b.scalar_coeffs.size() != 0 && b.scalar_coeffs.size() != num_scalars)
      throw std::invalid_argument("sdp: box scalar_coeffs size mismatch");
  }
  for (const auto& m : mapped_blocks) {
    if (m.size < 1) throw std::invalid_argument("sdp: mapped block size");
    const int sd = sym_dim(m.size);
    if (m.map_h.size() > 0 && (m.map_h.rows() != sd || m.map_h.cols() != dh))
      throw std::invalid_argument("sdp: mapped map_h shape mismatch");
    if (m.const_part.size() != 0 && m.const_part.size() != sd)
      throw std::invalid_argument("sdp: mapped const_part size mismatch");
    if (!m.scalar_dirs.empty() &&
        static_cast<int>(m.scalar_dirs.size()) != num_scalars)
      throw std::invalid_argument("sdp: mapped scalar_dirs count mismatch");
    for (const auto& dcol : m.scalar_dirs) {
      if (dcol.size() != 0 && dcol.size() != sd)
        throw std::invalid_argument("sdp: mapped scalar_dir size mismatch");
    }
  }
  // Every scalar must appear in some block, else the Newton system is
  // singular.
  for (int j = 0; j < num_scalars; ++j) {
    bool covered = false;
    for (const auto& b : box_blocks) {
      if (b.scalar_coeffs.size() > 0 && b.scalar_coeffs(j) != 0.0)
        covered = true;
    }
    for (const auto& m : mapped_blocks) {
      if (!m.scalar_dirs.empty() && m.scalar_dirs[j].size() > 0 &&
          m.scalar_dirs[j].norm() > 0.0)
        covered = true;
    }
    if (!covered)
      throw std::invalid_argument("sdp: scalar variable not used by any block");
  }
}

const char* solve_status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::max_iterations:
      return "max_iterations";
  }
  return "unknown";
}

SdpSolution solve(const SdpProblem& problem, const SolveOptions& opts) {
  Prepared pr = prepare(problem);
  SdpSolution sol;
  if (opts.trace) {
    *opts.trace << "phase,newton_step,t,objective,eq_residual,min_cone_eig\n";
  }
  if (!pr.eq_consistent) {
    sol.status = SolveStatus::infeasible;
    sol.message = "equality constraints are inconsistent";
    return sol;
  }

  int budget = opts.max_iter;
  int total_steps = 0;
  Eigen::VectorXd v = start_point(pr);

  const double need = 1e-4;
  if (!evaluate(pr, v, false).feasible || min_cone_margin(pr, v) < need) {
    PhaseOneResult p1 = phase_one(pr, v, need, 0.0, opts, budget, opts.trace,
                                  total_steps);
    if (!p1.decided) {
      sol.status = SolveStatus::max_iterations;
      sol.newton_steps = total_steps;
      sol.message = "phase I exhausted the Newton budget";
      return sol;
    }
    if (!p1.feasible || p1.margin <= 0.0) {
      sol.status = SolveStatus::infeasible;
      sol.newton_steps = total_steps;
      std::ostringstream msg;
      msg << "infeasible: best uniform cone margin bounded by " << p1.margin;
      sol.message = msg.str();
      return sol;
    }
    v = p1.v;
  }

  auto no_probe = [](const Eigen::VectorXd&, double) { return 0; };
  RunOutcome run = path_follow(pr, v, opts, budget, opts.tol, no_probe,
                               opts.trace, "phase2", total_steps);

  sol.h_svec = v.head(pr.d_h);
  sol.scalars = v.tail(pr.num_scalars);
  sol.objective = pr.c.dot(v);
  sol.max_eq_violation = original_eq_violation(problem, sol.h_svec, sol.scalars);
  sol.min_cone_eig = min_cone_margin(pr, v);
  sol.newton_steps = total_steps;
  std::ostringstream msg;
  switch (run.stop) {
    case RunStop::converged:
      sol.status = SolveStatus::optimal;
      msg << "converged with duality gap " << run.last_gap;
      break;
    case RunStop::stalled:
      // The returned point is the last completed centering, so last_gap is a
      // rigorous suboptimality bound; accept it when it is small enough to be
      // a solve at slightly reduced accuracy.
      if (run.last_gap <= 1e3 * opts.tol) {
        sol.status = SolveStatus::optimal;
        msg << "stopped at the last centered point, duality gap "
            << run.last_gap;
      } else {
        sol.status = SolveStatus::max_iterations;
        msg << "line search stalled at duality gap " << run.last_gap;
      }
      break;
    case RunStop::max_steps:
      sol.status = SolveStatus::max_iterations;
      msg << "Newton budget exhausted at duality gap " << run.last_gap;
      break;
    case RunStop::early:
      sol.status = SolveStatus::max_iterations;
      msg << "unexpected early stop";
      break;
  }
  sol.message = msg.str();
  return sol;
}

FeasibilityResult feasibility(const SdpProblem& problem, double margin,
                              const SolveOptions& opts) {
  Prepared pr = prepare(problem);
  if (opts.trace) {
    *opts.trace << "phase,newton_step,t,objective,eq_residual,min_cone_eig\n";
  }
  FeasibilityResult res;
  res.degenerate_error_vector = problem.degenerate_error_vector;
  if (!pr.eq_consistent) {
    res.feasible = false;
    res.status = SolveStatus::optimal;  // decided: no point satisfies them
    res.margin = -std::numeric_limits<double>::infinity();
    return res;
  }
  int budget = opts.max_iter;
  int total_steps = 0;
  Eigen::VectorXd v = start_point(pr);

  const double quick = (evaluate(pr, v, false).feasible)
                           ? min_cone_margin(pr, v)
                           : -std::numeric_limits<double>::infinity();
  const double slack = std::max(10.0 * opts.tol, 1e-12);
  if (quick >= margin + slack) {
    res.feasible = true;
    res.status = SolveStatus::optimal;
    res.h_svec = v.head(pr.d_h);
    res.scalars = v.tail(pr.num_scalars);
    res.margin = quick;
    res.newton_steps = 0;
    return res;
  }

  PhaseOneResult p1 = phase_one(pr, v, margin, margin, opts, budget,
                                 opts.trace, total_steps);
  res.newton_steps = total_steps;
  if (!p1.decided) {
    res.status = SolveStatus::max_iterations;
    res.feasible = false;
    res.margin = p1.margin;
    return res;
  }
  res.status = SolveStatus::optimal;
  res.feasible = p1.feasible && p1.margin >= margin;
  res.margin = p1.margin;
  if (res.feasible) {
    res.h_svec = p1.v.head(pr.d_h);
    res.scalars = p1.v.tail(pr.num_scalars);
  }
  return res;
}

}  // namespace ripforge
