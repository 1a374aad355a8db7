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
#ifndef REWIRE_INFECTIVE_TABLE_HPP
#define REWIRE_INFECTIVE_TABLE_HPP

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rewire
{

/**
 * Multiset of per-infective live-edge counts.
 *
 * Infectives occupy dense slots [0, size()). A Fenwick tree over the slots
 * gives O(log n) edge-weighted selection and O(log n) updates; removal moves
 * the last slot into the hole, so slot indices are not stable across remove().
 */
class InfectiveTable
{
public:
    InfectiveTable() = default;

    explicit InfectiveTable(std::size_t capacity)
    {
        reserve(capacity);
    }

    void reserve(std::size_t capacity)
    {
        if (capacity <= tree_.size()) {
            return;
        }
        // rebuild the tree at the new size
        std::vector<std::int64_t> old(counts_);
        tree_.assign(capacity, 0);
        counts_.clear();
        total_ = 0;
        for (auto c : old) {
            push(c);
        }
    }

    std::size_t size() const noexcept
    {
        return counts_.size();
    }

    bool empty() const noexcept
    {
        return counts_.empty();
    }

    std::int64_t total() const noexcept
    {
        return total_;
    }

    std::int64_t count(std::size_t slot) const
    {
        return counts_[slot];
    }

    std::span<const std::int64_t> counts() const noexcept
    {
        return counts_;
    }

    std::size_t push(std::int64_t edges)
    {
        assert(edges >= 0);
        if (counts_.size() == tree_.size()) {
            reserve(tree_.empty() ? 16 : 2 * tree_.size());
        }
        const std::size_t slot = counts_.size();
        counts_.push_back(0);
        add(slot, edges);
        return slot;
    }

    void add(std::size_t slot, std::int64_t delta)
    {
        assert(counts_[slot] + delta >= 0);
        counts_[slot] += delta;
        total_ += delta;
        for (std::size_t k = slot + 1; k <= tree_.size(); k += k & (~k + 1)) {
            tree_[k - 1] += delta;
        }
    }

    /// Removes the infective in `slot` with all its edges.
    void remove(std::size_t slot)
    {
        const std::size_t last = counts_.size() - 1;
        if (slot != last) {
            const std::int64_t moved = counts_[last];
            add(slot, moved - counts_[slot]);
            add(last, -moved);
        }
        else {
            add(slot, -counts_[slot]);
        }
        counts_.pop_back();
    }

    /// Slot owning the edge with 0-based rank `edge` in slot order. Requires edge < total().
    std::size_t find_edge(std::int64_t edge) const
    {
        assert(edge >= 0 && edge < total_);
        std::size_t pos = 0;
        std::size_t step = 1;
        while (step * 2 <= tree_.size()) {
            step *= 2;
        }
        for (; step > 0; step /= 2) {
            const std::size_t next = pos + step;
            if (next <= tree_.size() && tree_[next - 1] <= edge) {
                edge -= tree_[next - 1];
                pos = next;
            }
        }
        return pos;
    }

    void clear()
    {
        counts_.clear();
        std::fill(tree_.begin(), tree_.end(), 0);
        total_ = 0;
    }

private:
    std::vector<std::int64_t> counts_;
    std::vector<std::int64_t> tree_;
    std::int64_t total_ = 0;
};

} // namespace rewire

#endif // REWIRE_INFECTIVE_TABLE_HPP
