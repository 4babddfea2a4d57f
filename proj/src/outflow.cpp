#include "qnet/outflow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "linalg.hpp"

namespace qnet {

namespace {

// Tarjan SCC over the zero-delay subgraph restricted to the zero set.
// comps come out sinks-first; callers reverse for upstream-first order.
struct SccFinder {
  const std::vector<std::vector<int>>& adj;
  std::vector<int> index, low, stk;
  std::vector<char> on_stack;
  std::vector<std::vector<int>> comps;
  int counter = 0;

  explicit SccFinder(const std::vector<std::vector<int>>& a)
      : adj(a), index(a.size(), -1), low(a.size(), 0), on_stack(a.size(), 0) {}

  void dfs(int v) {
    index[v] = low[v] = counter++;
    stk.push_back(v);
    on_stack[v] = 1;
    for (int w : adj[v]) {
      if (index[w] < 0) {
        dfs(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      comps.emplace_back();
      int w;
      do {
        w = stk.back();
        stk.pop_back();
        on_stack[w] = 0;
        comps.back().push_back(w);
      } while (w != v);
    }
  }
};

}  // namespace

OutflowSolver::OutflowSolver(const Network& net)
    : n_(net.n_links), up0_(net.n_links) {
  for (const auto& e : net.routing)
    if (e.delay == 0 && e.ratio > 0) {
      up0_[e.to].emplace_back(e.from, e.ratio);
      edges0_.emplace_back(e.from, e.to);
    }
}

std::vector<double> OutflowSolver::solve(const OutflowQuery& q) const {
  std::vector<double> z;
  solve_into(q, z);
  return z;
}

void OutflowSolver::solve_into(const OutflowQuery& q,
                               std::vector<double>& z) const {
  if (static_cast<int>(q.zero_set.size()) != n_ ||
      static_cast<int>(q.eff_inflow.size()) != n_ ||
      static_cast<int>(q.capacity_now.size()) != n_)
    throw std::invalid_argument("outflow query size mismatch");

  z = q.capacity_now;
  if (edges0_.empty() || n_ == 0) {
    // No couplings: each zero-set link takes the min formula directly.
    for (int i = 0; i < n_; ++i)
      if (q.zero_set[i]) z[i] = std::min(q.capacity_now[i], q.eff_inflow[i]);
    return;
  }

  std::vector<std::vector<int>> adj(n_);
  std::vector<int> nodes;
  for (int i = 0; i < n_; ++i)
    if (q.zero_set[i]) nodes.push_back(i);
  for (const auto& [from, to] : edges0_)
    if (q.zero_set[from] && q.zero_set[to]) adj[from].push_back(to);

  SccFinder scc(adj);
  for (int v : nodes)
    if (scc.index[v] < 0) scc.dfs(v);
  std::reverse(scc.comps.begin(), scc.comps.end());

  auto inflow_bound = [&](int i) {
    double s = q.eff_inflow[i];
    for (const auto& [j, r] : up0_[i]) s += r * z[j];
    return s;
  };

  for (const auto& comp : scc.comps) {
    if (comp.size() == 1) {
      int i = comp[0];
      z[i] = std::min(q.capacity_now[i], inflow_bound(i));
      continue;
    }
    bool converged = false;
    for (int it = 0; it < 10000; ++it) {
      double change = 0.0;
      for (int i : comp) {
        double next = std::min(q.capacity_now[i], inflow_bound(i));
        change = std::max(change, std::abs(next - z[i]));
        z[i] = next;
      }
      if (change < 1e-12) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      // Exact solve on the subset whose min binds on the inflow branch.
      std::vector<int> bind;
      for (int i : comp)
        if (inflow_bound(i) < q.capacity_now[i]) bind.push_back(i);
      if (bind.empty())
        throw std::runtime_error(
            "outflow solve failed to converge; network likely violates "
            "spectral radius < 1");
      std::vector<int> pos(n_, -1);
      for (std::size_t k = 0; k < bind.size(); ++k)
        pos[bind[k]] = static_cast<int>(k);
      std::vector<std::vector<double>> A(bind.size(),
                                         std::vector<double>(bind.size(), 0));
      std::vector<double> b(bind.size(), 0.0);
      for (std::size_t k = 0; k < bind.size(); ++k) {
        int i = bind[k];
        A[k][k] = 1.0;
        b[k] = q.eff_inflow[i];
        for (const auto& [j, r] : up0_[i]) {
          if (pos[j] >= 0)
            A[k][pos[j]] -= r;
          else
            b[k] += r * z[j];
        }
      }
      auto sol = detail::solve_dense(std::move(A), std::move(b));
      for (std::size_t k = 0; k < bind.size(); ++k)
        z[bind[k]] = std::min(q.capacity_now[bind[k]], sol[k]);
    }
  }
}

}  // namespace qnet
