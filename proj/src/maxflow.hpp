// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

namespace evsched::detail {

/// Dinic's blocking-flow max-flow on integer capacities.
class MaxFlow {
public:
    explicit MaxFlow(int n) : adj_(static_cast<std::size_t>(n)), level_(adj_.size()), it_(adj_.size()) {}

    /// Returns the arc index; use flow(id) after solve().
    int add_arc(int from, int to, std::int64_t cap) {
        const int id = static_cast<int>(arcs_.size());
        arcs_.push_back({to, cap, 0});
        adj_[from].push_back(id);
        arcs_.push_back({from, 0, 0});
        adj_[to].push_back(id + 1);
        return id;
    }

    std::int64_t solve(int s, int t) {
        std::int64_t total = 0;
        while (bfs(s, t)) {
            std::fill(it_.begin(), it_.end(), 0);
            while (std::int64_t pushed = dfs(s, t, std::numeric_limits<std::int64_t>::max())) total += pushed;
        }
        return total;
    }

    std::int64_t flow(int arc) const { return arcs_[arc].flow; }

    /// Nodes reachable from s in the residual graph (valid after solve()).
    std::vector<bool> reachable(int s) const {
        std::vector<bool> seen(adj_.size(), false);
        std::vector<int> stack{s};
        seen[s] = true;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int id : adj_[v]) {
                const Arc& a = arcs_[id];
                if (a.cap - a.flow > 0 && !seen[a.to]) {
                    seen[a.to] = true;
                    stack.push_back(a.to);
                }
            }
        }
        return seen;
    }

private:
    struct Arc {
        int to;
        std::int64_t cap;
        std::int64_t flow;
    };

    bool bfs(int s, int t) {
        std::fill(level_.begin(), level_.end(), -1);
        std::queue<int> q;
        level_[s] = 0;
        q.push(s);
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            for (int id : adj_[v]) {
                const Arc& a = arcs_[id];
                if (a.cap - a.flow > 0 && level_[a.to] < 0) {
                    level_[a.to] = level_[v] + 1;
                    q.push(a.to);
                }
            }
        }
        return level_[t] >= 0;
    }

    std::int64_t dfs(int v, int t, std::int64_t limit) {
        if (v == t) return limit;
        for (std::size_t& i = it_[v]; i < adj_[v].size(); ++i) {
            const int id = adj_[v][i];
            Arc& a = arcs_[id];
            if (a.cap - a.flow <= 0 || level_[a.to] != level_[v] + 1) continue;
            const std::int64_t pushed = dfs(a.to, t, std::min(limit, a.cap - a.flow));
            if (pushed > 0) {
                a.flow += pushed;
                arcs_[id ^ 1].flow -= pushed;
                return pushed;
            }
        }
        return 0;
    }

    std::vector<Arc> arcs_;
    std::vector<std::vector<int>> adj_;
    std::vector<int> level_;
    std::vector<std::size_t> it_;
};

} // namespace evsched::detail
