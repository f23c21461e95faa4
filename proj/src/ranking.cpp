#include "ecx/ranking.hpp"

#include "ecx/csv.hpp"

#include <ostream>

namespace ecx {

void write_score_csv(std::ostream& out, std::string_view label_header, std::string_view value_header,
                     std::span<const std::string> labels, std::span<const double> scores)
{
    const auto rank = ranks_descending(scores, labels);
    csv::write_row(out, {std::string(label_header), std::string(value_header), "rank"});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        csv::write_row(out, {labels[i], csv::format_double(scores[i]), std::to_string(rank[i])});
    }
}

} // namespace ecx
