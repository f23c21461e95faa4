#pragma once

#include <algorithm>
#include <iosfwd>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ecx {

// Indices sorted by descending score; equal scores ordered by label.
inline std::vector<std::size_t> order_descending(std::span<const double> scores,
                                                 std::span<const std::string> labels)
{
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) {
            return scores[a] > scores[b];
        }
        return labels[a] < labels[b];
    });
    return order;
}

// 1-based ordinal rank per item (1 = highest score).
inline std::vector<std::size_t> ranks_descending(std::span<const double> scores,
                                                 std::span<const std::string> labels)
{
    const auto order = order_descending(scores, labels);
    std::vector<std::size_t> rank(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        rank[order[i]] = i + 1;
    }
    return rank;
}

// "<label_header>,<value_header>,rank" rows in catalog order.
void write_score_csv(std::ostream& out, std::string_view label_header, std::string_view value_header,
                     std::span<const std::string> labels, std::span<const double> scores);

} // namespace ecx
