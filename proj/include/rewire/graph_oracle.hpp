/*
 * Copyright (C) 2026 The rewire authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef REWIRE_GRAPH_ORACLE_HPP
#define REWIRE_GRAPH_ORACLE_HPP

#include <algorithm>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <vector>

#include "ctmc.hpp"
#include "model.hpp"
#include "random.hpp"
#include "replicates.hpp"

namespace rewire
{

inline constexpr std::int64_t oracle_max_n = 2000;

/// Dense set of small integers with O(1) insert, erase and uniform pick.
class IndexedSet
{
public:
    explicit IndexedSet(std::size_t universe = 0)
        : pos_(universe, npos)
    {
    }

    void resize(std::size_t universe)
    {
        pos_.assign(universe, npos);
        items_.clear();
    }

    bool contains(std::uint32_t x) const
    {
        return pos_[x] != npos;
    }

    void insert(std::uint32_t x)
    {
        if (contains(x)) {
            return;
        }
        pos_[x] = items_.size();
        items_.push_back(x);
    }

    void erase(std::uint32_t x)
    {
        const std::size_t p = pos_[x];
        if (p == npos) {
            return;
        }
        const std::uint32_t last = items_.back();
        items_[p]                = last;
        pos_[last]               = p;
        items_.pop_back();
        pos_[x] = npos;
    }

    std::size_t size() const noexcept
    {
        return items_.size();
    }

    std::uint32_t operator[](std::size_t k) const
    {
        return items_[k];
    }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> pos_;
    std::vector<std::uint32_t> items_;
};

/**
 * Undirected multigraph without self-loops. Edges keep stable ids; each node
 * holds the ids of its incident edges, so parallel edges appear once per copy.
 */
class Graph
{
public:
    struct Edge {
        std::uint32_t a;
        std::uint32_t b;
        std::uint32_t slot_a; // index of this edge in adjacency of a
        std::uint32_t slot_b;
        bool alive;
    };

    explicit Graph(std::uint32_t n = 0)
        : adj_(n)
    {
    }

    std::uint32_t n() const noexcept
    {
        return static_cast<std::uint32_t>(adj_.size());
    }

    std::size_t edge_count() const noexcept
    {
        return live_;
    }

    std::size_t edge_capacity() const noexcept
    {
        return edges_.size();
    }

    const Edge& edge(std::uint32_t e) const
    {
        return edges_[e];
    }

    const std::vector<std::uint32_t>& incident(std::uint32_t u) const
    {
        return adj_[u];
    }

    std::size_t degree(std::uint32_t u) const
    {
        return adj_[u].size();
    }

    std::uint32_t other_end(std::uint32_t e, std::uint32_t u) const
    {
        return edges_[e].a == u ? edges_[e].b : edges_[e].a;
    }

    std::uint32_t add_edge(std::uint32_t a, std::uint32_t b)
    {
        if (a == b) {
            throw std::invalid_argument("self-loop");
        }
        const auto id = static_cast<std::uint32_t>(edges_.size());
        edges_.push_back({a, b, static_cast<std::uint32_t>(adj_[a].size()),
                          static_cast<std::uint32_t>(adj_[b].size()), true});
        adj_[a].push_back(id);
        adj_[b].push_back(id);
        ++live_;
        return id;
    }

    void remove_edge(std::uint32_t e)
    {
        Edge& ed = edges_[e];
        detach(ed.a, ed.slot_a);
        detach(ed.b, ed.slot_b);
        ed.alive = false;
        --live_;
    }

    /// Moves endpoint `from` of edge e to node `to`; the other endpoint stays.
    void move_end(std::uint32_t e, std::uint32_t from, std::uint32_t to)
    {
        Edge& ed = edges_[e];
        if (ed.a == from) {
            detach(from, ed.slot_a);
            ed.a      = to;
            ed.slot_a = static_cast<std::uint32_t>(adj_[to].size());
        }
        else {
            detach(from, ed.slot_b);
            ed.b      = to;
            ed.slot_b = static_cast<std::uint32_t>(adj_[to].size());
        }
        if (ed.a == ed.b) {
            throw std::logic_error("rewire produced a self-loop");
        }
        adj_[to].push_back(e);
    }

    /// Sorted neighbour multiset of u (one entry per parallel edge).
    std::vector<std::uint32_t> neighbors(std::uint32_t u) const
    {
        std::vector<std::uint32_t> out;
        out.reserve(adj_[u].size());
        for (auto e : adj_[u]) {
            out.push_back(other_end(e, u));
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    void detach(std::uint32_t u, std::uint32_t slot)
    {
        auto& list                = adj_[u];
        const std::uint32_t moved = list.back();
        list[slot]                = moved;
        list.pop_back();
        if (slot < list.size()) {
            Edge& m = edges_[moved];
            // no self-loops, so exactly one endpoint of the moved edge is u
            if (m.a == u) {
                m.slot_a = slot;
            }
            else {
                m.slot_b = slot;
            }
        }
    }

    std::vector<std::vector<std::uint32_t>> adj_;
    std::vector<Edge> edges_;
    std::size_t live_ = 0;
};

/// G(n, mu/n) by independent trials over all n(n-1)/2 pairs.
template <VariateSource R>
Graph sample_er_graph(std::int64_t n, double mu, R& rng)
{
    if (n < 1 || !(mu >= 0.0) || (n > 1 && !(mu < static_cast<double>(n)))) {
        throw DomainError("sample_er_graph requires n >= 1 and 0 <= mu < n");
    }
    Graph g(static_cast<std::uint32_t>(n));
    const double p = mu / static_cast<double>(n);
    if (p <= 0.0) {
        return g;
    }
    for (std::uint32_t a = 0; a + 1 < static_cast<std::uint32_t>(n); ++a) {
        for (std::uint32_t b = a + 1; b < static_cast<std::uint32_t>(n); ++b) {
            if (rng.uniform() <= p) {
                g.add_edge(a, b);
            }
        }
    }
    return g;
}

/// Number of nodes connected to at least one of nodes [0, seeds).
inline std::int64_t component_union_size(const Graph& g, std::uint32_t seeds)
{
    std::vector<char> seen(g.n(), 0);
    std::queue<std::uint32_t> q;
    for (std::uint32_t u = 0; u < seeds; ++u) {
        seen[u] = 1;
        q.push(u);
    }
    std::int64_t count = seeds;
    while (!q.empty()) {
        const auto u = q.front();
        q.pop();
        for (auto e : g.incident(u)) {
            const auto v = g.other_end(e, u);
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                q.push(v);
            }
        }
    }
    return count;
}

enum class Status : std::uint8_t { susceptible, infective, recovered };

/**
 * Literal model on an explicit graph: every susceptible-infective edge carries
 * an infection clock (rate lambda) and a warning clock (rate omega); every
 * infective recovers at rate gamma. Nodes [0, initials) start infective.
 */
class NaiveEpidemic
{
public:
    NaiveEpidemic(Graph graph, const Params& p, RewireMode mode, std::uint32_t initials)
        : g_(std::move(graph))
    {
        const auto eff = effective_model(p, mode);
        params_        = eff.params;
        mode_          = eff.mode;
        const auto n   = g_.n();
        if (initials < 1 || initials >= n || n < 3) {
            throw DomainError("naive epidemic needs n >= 3 and 1 <= initials < n");
        }
        status_.assign(n, Status::susceptible);
        sus_.resize(n);
        inf_.resize(n);
        rec_.resize(n);
        si_.resize(g_.edge_capacity());
        for (std::uint32_t u = 0; u < n; ++u) {
            sus_.insert(u);
        }
        for (std::uint32_t u = 0; u < initials; ++u) {
            infect(u);
        }
    }

    const Graph& graph() const noexcept
    {
        return g_;
    }

    Status status(std::uint32_t u) const
    {
        return status_[u];
    }

    std::size_t susceptibles() const noexcept
    {
        return sus_.size();
    }

    std::size_t infectives() const noexcept
    {
        return inf_.size();
    }

    std::size_t si_edges() const noexcept
    {
        return si_.size();
    }

    double total_rate() const noexcept
    {
        return (params_.lambda + params_.omega) * static_cast<double>(si_.size())
               + params_.gamma * static_cast<double>(inf_.size());
    }

    template <VariateSource R>
    EventKind step(R& rng)
    {
        const double infection = params_.lambda * static_cast<double>(si_.size());
        const double warn      = params_.omega * static_cast<double>(si_.size());
        const double total     = total_rate();
        if (!(total > 0.0)) {
            throw Absorbed();
        }
        t_ += rng.exponential(total);
        const double u = rng.uniform() * total;
        if (u <= infection) {
            const auto e = si_[rng.uniform_index(si_.size())];
            infect(susceptible_end(e));
            return EventKind::infection;
        }
        if (u <= infection + warn) {
            return warning(si_[rng.uniform_index(si_.size())], rng);
        }
        recover(inf_[rng.uniform_index(inf_.size())]);
        return EventKind::recovery;
    }

    double time() const noexcept
    {
        return t_;
    }

private:
    std::uint32_t susceptible_end(std::uint32_t e) const
    {
        const auto& ed = g_.edge(e);
        return status_[ed.a] == Status::susceptible ? ed.a : ed.b;
    }

    void refresh(std::uint32_t e)
    {
        const auto& ed = g_.edge(e);
        const Status x = status_[ed.a];
        const Status y = status_[ed.b];
        const bool is_si = ed.alive && ((x == Status::susceptible && y == Status::infective)
                                        || (x == Status::infective && y == Status::susceptible));
        if (is_si) {
            si_.insert(e);
        }
        else {
            si_.erase(e);
        }
    }

    void infect(std::uint32_t u)
    {
        status_[u] = Status::infective;
        sus_.erase(u);
        inf_.insert(u);
        for (auto e : g_.incident(u)) {
            refresh(e);
        }
    }

    void recover(std::uint32_t u)
    {
        status_[u] = Status::recovered;
        inf_.erase(u);
        rec_.insert(u);
        for (auto e : g_.incident(u)) {
            refresh(e);
        }
    }

    template <VariateSource R>
    EventKind warning(std::uint32_t e, R& rng)
    {
        const std::uint32_t x = susceptible_end(e);
        const std::uint32_t y = g_.other_end(e, x);
        if (!rng.bernoulli(params_.alpha)) {
            si_.erase(e);
            g_.remove_edge(e);
            return EventKind::warning_drop;
        }
        std::uint32_t z = 0;
        switch (mode_) {
        case RewireMode::SusceptibleOnly: {
            if (sus_.size() < 2) {
                return EventKind::warning_retained;
            }
            auto k = rng.uniform_index(sus_.size() - 1);
            z      = sus_[k];
            if (z == x) {
                z = sus_[sus_.size() - 1];
            }
            break;
        }
        case RewireMode::NonInfectious: {
            const std::size_t pool = sus_.size() - 1 + rec_.size();
            if (pool == 0) {
                return EventKind::warning_retained;
            }
            const auto k = rng.uniform_index(pool);
            if (k < sus_.size() - 1) {
                z = sus_[k];
                if (z == x) {
                    z = sus_[sus_.size() - 1];
                }
            }
            else {
                z = rec_[k - (sus_.size() - 1)];
            }
            break;
        }
        default: {
            // uniform over everyone except x and y
            z                     = static_cast<std::uint32_t>(rng.uniform_index(g_.n() - 2));
            const std::uint32_t a = std::min(x, y);
            const std::uint32_t b = std::max(x, y);
            if (z >= a) {
                ++z;
            }
            if (z >= b) {
                ++z;
            }
            break;
        }
        }
        g_.move_end(e, y, z);
        refresh(e);
        switch (status_[z]) {
        case Status::susceptible:
            return EventKind::rewire_susceptible;
        case Status::infective:
            return EventKind::rewire_infective;
        default:
            return EventKind::rewire_recovered;
        }
    }

    Graph g_;
    Params params_{};
    RewireMode mode_ = RewireMode::UniformAll;
    std::vector<Status> status_;
    IndexedSet sus_;
    IndexedSet inf_;
    IndexedSet rec_;
    IndexedSet si_;
    double t_ = 0.0;
};

/// Runs the literal model on a fresh G(n, mu/n) under the same configuration type as the construction.
template <VariateSource R>
FinalSizeReport run_naive(const SimConfig& cfg, R& rng)
{
    validate(cfg);
    if (cfg.n > oracle_max_n) {
        throw DomainError("graph oracle is capped at n <= 2000");
    }
    NaiveEpidemic epi(sample_er_graph(cfg.n, cfg.params.mu, rng), cfg.params, cfg.mode,
                      static_cast<std::uint32_t>(cfg.initial_infectives));
    std::int64_t events = 0;
    bool truncated      = false;
    while (epi.total_rate() > 0.0) {
        if (events >= cfg.max_events) {
            truncated = true;
            break;
        }
        epi.step(rng);
        ++events;
    }
    const auto final_size = cfg.n - static_cast<std::int64_t>(epi.susceptibles());
    return make_report(cfg.n, final_size, major_threshold(cfg), truncated, events, cfg.seed);
}

inline FinalSizeReport run_naive(const SimConfig& cfg)
{
    Sampler rng(cfg.seed);
    return run_naive(cfg, rng);
}

/// Oracle replicates; replicate k uses the same derived seed as run_replicates.
inline ReplicateSet run_naive_replicates(const SimConfig& cfg, std::size_t reps, unsigned threads = 1)
{
    validate(cfg);
    ReplicateSet set;
    set.reports = parallel_map(reps, threads, [&](std::size_t k) { return run_naive(replicate_config(cfg, k)); });
    set.summary = summarize(set.reports);
    return set;
}

} // namespace rewire

#endif // REWIRE_GRAPH_ORACLE_HPP
