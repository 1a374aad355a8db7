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
#include <gtest/gtest.h>

#include <numeric>
#include <vector>

#include "rewire/infective_table.hpp"
#include "rewire/random.hpp"

using namespace rewire;

TEST(InfectiveTable, FindEdgeMapsRanksToOwners)
{
    InfectiveTable t;
    t.push(2);
    t.push(0);
    t.push(3);
    t.push(1);
    EXPECT_EQ(t.total(), 6);
    const std::vector<std::size_t> owner = {0, 0, 2, 2, 2, 3};
    for (std::int64_t r = 0; r < 6; ++r) {
        EXPECT_EQ(t.find_edge(r), owner[r]) << r;
    }
}

TEST(InfectiveTable, RemoveMovesLastSlot)
{
    InfectiveTable t;
    t.push(4);
    t.push(1);
    t.push(7);
    t.remove(0);
    ASSERT_EQ(t.size(), 2U);
    EXPECT_EQ(t.count(0), 7);
    EXPECT_EQ(t.count(1), 1);
    EXPECT_EQ(t.total(), 8);
    t.remove(1);
    EXPECT_EQ(t.total(), 7);
    t.remove(0);
    EXPECT_TRUE(t.empty());
    EXPECT_EQ(t.total(), 0);
}

TEST(InfectiveTable, RandomisedAgainstPlainVector)
{
    Sampler rng(21);
    InfectiveTable t;
    std::vector<std::int64_t> ref;
    for (int step = 0; step < 20000; ++step) {
        const double u = rng.uniform();
        if (ref.empty() || u < 0.4) {
            const auto c = rng.poisson(3.0);
            t.push(c);
            ref.push_back(c);
        }
        else if (u < 0.6) {
            const auto slot = static_cast<std::size_t>(rng.uniform_index(ref.size()));
            t.remove(slot);
            ref[slot] = ref.back();
            ref.pop_back();
        }
        else {
            const auto slot = static_cast<std::size_t>(rng.uniform_index(ref.size()));
            const std::int64_t delta = ref[slot] > 0 && rng.bernoulli(0.5) ? -1 : 1;
            t.add(slot, delta);
            ref[slot] += delta;
        }
        ASSERT_EQ(t.size(), ref.size());
        ASSERT_EQ(t.total(), std::accumulate(ref.begin(), ref.end(), std::int64_t{0}));
        if (t.total() > 0 && step % 50 == 0) {
            const auto rank = static_cast<std::int64_t>(rng.uniform_index(t.total()));
            std::int64_t acc = 0;
            std::size_t expect = 0;
            for (; expect < ref.size(); ++expect) {
                acc += ref[expect];
                if (acc > rank) {
                    break;
                }
            }
            ASSERT_EQ(t.find_edge(rank), expect);
        }
    }
}
