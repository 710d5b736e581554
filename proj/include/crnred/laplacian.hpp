#pragma once

#include <Eigen/Dense>
#include <iostream>
#include <vector>

#include "crnred/intermediates.hpp"
#include "crnred/network.hpp"
#include "crnred/npoly.hpp"
#include "crnred/spanning_trees.hpp"

namespace crnred {

inline constexpr double kConditionWarnThreshold = 1e12;

// Consumption Laplacian of the intermediate block. Off-diagonal (l,l') holds
// the transfer constant kappa_{l'l} (note the transpose: column l' feeds row
// l), the diagonal holds minus the total consumption of H_l over all targets
// in V and W. Entries are kept both numerically (at the given N) and as exact
// polynomials in N.
struct LaplacianCore {
  int dim = 0;
  double N = 1.0;
  Eigen::MatrixXd M;

  std::vector<std::vector<NPoly>> transfer;  // [l][lp]: H_l -> H_lp constant
  std::vector<NPoly> exit;                   // [l]: summed H_l -> W constants
  std::vector<NPoly> consumption;            // [l]: row sum of transfer + exit

  // Exact leading exponent of the total consumption of H_l.
  Rational consumptionExponent(int l) const {
    return consumption[static_cast<std::size_t>(l)].leading().exp;
  }
};

inline LaplacianCore assemble_laplacian(const ReactionNetwork& net,
                                        const IntermediateDecomposition& dec,
                                        double N) {
  const int n = dec.size();
  LaplacianCore core;
  core.dim = n;
  core.N = N;
  core.transfer.assign(
      static_cast<std::size_t>(n),
      std::vector<NPoly>(static_cast<std::size_t>(n), NPoly::zero()));
  core.exit.assign(static_cast<std::size_t>(n), NPoly::zero());
  core.consumption.assign(static_cast<std::size_t>(n), NPoly::zero());

  for (const auto& rx : net.reactions) {
    int ls = dec.complexToL[static_cast<std::size_t>(rx.source)];
    if (ls < 0) continue;
    NPoly rate = NPoly::monomial(rx.law.kappa, rx.law.eta);
    int lt = dec.complexToL[static_cast<std::size_t>(rx.target)];
    if (lt >= 0)
      core.transfer[static_cast<std::size_t>(ls)][static_cast<std::size_t>(lt)] += rate;
    else
      core.exit[static_cast<std::size_t>(ls)] += rate;
    core.consumption[static_cast<std::size_t>(ls)] += rate;
  }

  for (int l = 0; l < n; ++l)
    if (core.consumption[static_cast<std::size_t>(l)].isZero())
      throw ValidationError(
          "intermediate with no outgoing consumption: '" +
          net.species[static_cast<std::size_t>(
              dec.vSpecies[static_cast<std::size_t>(l)])] +
          "'");

  core.M = Eigen::MatrixXd::Zero(n, n);
  for (int l = 0; l < n; ++l) {
    for (int lp = 0; lp < n; ++lp)
      if (lp != l)
        core.M(l, lp) =
            core.transfer[static_cast<std::size_t>(lp)][static_cast<std::size_t>(l)].eval(N);
    core.M(l, l) = -core.consumption[static_cast<std::size_t>(l)].eval(N);
  }
  return core;
}

// Production rates lambda_{i.} into V from complex i at state x (full species
// order; intermediate entries unused because source complexes of U contain no
// intermediates).
inline Eigen::VectorXd production_vector(const ReactionNetwork& net,
                                         const IntermediateDecomposition& dec,
                                         int i, const std::vector<double>& x,
                                         double N) {
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(dec.size());
  for (int r = 0; r < net.reactionCount(); ++r) {
    const auto& rx = net.reactions[static_cast<std::size_t>(r)];
    if (rx.source != i) continue;
    int lt = dec.complexToL[static_cast<std::size_t>(rx.target)];
    if (lt >= 0) lambda(lt) = net.intensity(r, x, N);
  }
  return lambda;
}

namespace detail {

// Solve A x = b with iterative refinement. Residuals accumulate in extended
// precision, so the refined solution stays componentwise accurate even when
// consumption rates of very different order make the system ill conditioned.
inline Eigen::VectorXd refined_solve(
    const Eigen::PartialPivLU<Eigen::MatrixXd>& lu, const Eigen::MatrixXd& A,
    const Eigen::VectorXd& b) {
  Eigen::VectorXd x = lu.solve(b);
  if (!x.allFinite()) return x;
  Eigen::VectorXd r(b.size());
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      long double acc = static_cast<long double>(b(i));
      for (Eigen::Index k = 0; k < A.cols(); ++k)
        acc -= static_cast<long double>(A(i, k)) * x(k);
      r(i) = static_cast<double>(acc);
    }
    x += lu.solve(r);
  }
  return x;
}

}  // namespace detail

// mu as the solution of L m = -lambda_{i.}; warns on ill conditioning.
inline Eigen::VectorXd mu_by_solve(const ReactionNetwork& net,
                                   const IntermediateDecomposition& dec, int i,
                                   const std::vector<double>& x, double N) {
  LaplacianCore core = assemble_laplacian(net, dec, N);
  Eigen::VectorXd lambda = production_vector(net, dec, i, x, N);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(core.M);
  double rc = lu.rcond();
  if (!(rc > 1.0 / kConditionWarnThreshold))
    std::cerr << "warning: consumption Laplacian condition number exceeds "
              << kConditionWarnThreshold << " (rcond=" << rc << ")\n";
  Eigen::VectorXd m = detail::refined_solve(lu, core.M, -lambda);
  if (!m.allFinite())
    throw std::runtime_error("singular consumption Laplacian solve");
  return m;
}

namespace detail {

// Graph for the matrix-tree route: nodes 0..n-1 are the intermediates, node n
// is the absorbing state; production edges enter from node n.
template <typename Label, typename ProductionLabel>
LabelledDigraph<Label> mu_graph(const ReactionNetwork& net,
                                const IntermediateDecomposition& dec, int i,
                                ProductionLabel&& production,
                                const LaplacianCore& core,
                                Label (*fromPoly)(const NPoly&, double),
                                double N) {
  const int n = dec.size();
  LabelledDigraph<Label> g;
  g.n = n + 1;
  for (int l = 0; l < n; ++l) {
    for (int lp = 0; lp < n; ++lp) {
      const NPoly& p = core.transfer[static_cast<std::size_t>(l)][static_cast<std::size_t>(lp)];
      if (!p.isZero()) g.edges.push_back({l, lp, fromPoly(p, N)});
    }
    const NPoly& e = core.exit[static_cast<std::size_t>(l)];
    if (!e.isZero()) g.edges.push_back({l, n, fromPoly(e, N)});
  }
  for (int r = 0; r < net.reactionCount(); ++r) {
    const auto& rx = net.reactions[static_cast<std::size_t>(r)];
    if (rx.source != i) continue;
    int lt = dec.complexToL[static_cast<std::size_t>(rx.target)];
    if (lt >= 0) g.edges.push_back({n, lt, production(r)});
  }
  return g;
}

inline double polyEval(const NPoly& p, double N) { return p.eval(N); }
inline NPoly polyId(const NPoly& p, double /*N*/) { return p; }

}  // namespace detail

// mu by explicit enumeration of labelled spanning trees, for |V| within the
// enumeration cap.
inline Eigen::VectorXd mu_by_matrix_tree(const ReactionNetwork& net,
                                         const IntermediateDecomposition& dec,
                                         int i, const std::vector<double>& x,
                                         double N,
                                         int cap = kTreeEnumerationCap) {
  const int n = dec.size();
  if (n > cap) throw TreeCapExceeded(n, cap);
  LaplacianCore core = assemble_laplacian(net, dec, N);
  auto production = [&](int r) { return net.intensity(r, x, N); };
  auto g = detail::mu_graph<double>(net, dec, i, production, core,
                                    &detail::polyEval, N);
  double denom = tree_sum(g, n, 0.0, 1.0);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
  for (int l = 0; l < n; ++l) mu(l) = tree_sum(g, l, 0.0, 1.0) / denom;
  return mu;
}

// Symbolic mu: mu_{il}(x) = num[l](N)/den(N) * x^{y_i}. The denominator (sum
// over trees rooted at the absorbing node) does not depend on i; each
// numerator tree uses exactly one production edge, so the state monomial
// x^{y_i} factors out of every numerator term.
struct MuSymbolic {
  int sourceComplex = -1;
  NPoly den;
  std::vector<NPoly> num;  // per l
};

inline MuSymbolic mu_symbolic(const ReactionNetwork& net,
                              const IntermediateDecomposition& dec, int i,
                              int cap = kTreeEnumerationCap) {
  const int n = dec.size();
  if (n > cap) throw TreeCapExceeded(n, cap);
  LaplacianCore core = assemble_laplacian(net, dec, 1.0);
  auto production = [&](int r) {
    const auto& rx = net.reactions[static_cast<std::size_t>(r)];
    return NPoly::monomial(rx.law.kappa, rx.law.eta);
  };
  auto g = detail::mu_graph<NPoly>(net, dec, i, production, core,
                                   &detail::polyId, 1.0);
  MuSymbolic sym;
  sym.sourceComplex = i;
  sym.den = tree_sum(g, n, NPoly::zero(), NPoly::constant(Rational(1)));
  sym.num.reserve(static_cast<std::size_t>(n));
  for (int l = 0; l < n; ++l)
    sym.num.push_back(tree_sum(g, l, NPoly::zero(), NPoly::constant(Rational(1))));
  return sym;
}

// Splitting probabilities pi_{lj} = -(kappa_{.j}^T (L^N)^{-1})_l over the
// final products j in dec.W order; rows sum to one.
inline Eigen::MatrixXd splitting_probabilities(
    const ReactionNetwork& net, const IntermediateDecomposition& dec,
    double N) {
  const int n = dec.size();
  const int w = static_cast<int>(dec.W.size());
  LaplacianCore core = assemble_laplacian(net, dec, N);
  Eigen::MatrixXd Mt = core.M.transpose();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(Mt);
  Eigen::MatrixXd pi(n, w);
  for (int jc = 0; jc < w; ++jc) {
    Eigen::VectorXd kj = Eigen::VectorXd::Zero(n);
    for (const auto& rx : net.reactions) {
      if (rx.target != dec.W[static_cast<std::size_t>(jc)]) continue;
      int ls = dec.complexToL[static_cast<std::size_t>(rx.source)];
      if (ls >= 0) kj(ls) += rx.law.value(N);
    }
    pi.col(jc) = detail::refined_solve(lu, Mt, -kj);
  }
  return pi;
}

}  // namespace crnred
