#pragma once

// Cross-debate summaries built from per-debate metrics records.

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "debatelab/model.hpp"
#include "debatelab/stats.hpp"
#include "debatelab/store.hpp"

namespace debatelab {

enum class GroupBy { contentiousness, moderator, persona };

std::string_view to_string(GroupBy g);
std::optional<GroupBy> parse_group_by(std::string_view s);

/// Group label of a record: the contentiousness or moderator name, or
/// "<persona_a> vs <persona_b>".
std::string group_label(const MetricsRecord& record, GroupBy by);

struct AggregateOptions {
  std::optional<GroupBy> group_by;
  int bins = 20;
  double lo = -1.0;
  double hi = 1.0;
  stats::LeveneCenter center = stats::LeveneCenter::mean;
};

/// Per-round series are indexed 1..max R; each entry averages the debates
/// that reached that round. Persona psychometrics pool every debater slot
/// played by the persona, weighting debate means by their report counts.
/// A Levene row is produced only when grouping yields exactly two groups.
/// Throws TooFewValues for no records, and for a two-group split in which
/// a group holds fewer than two debates.
AggregateReport build_aggregate(std::span<const MetricsRecord> records,
                                const AggregateOptions& options = {});

}  // namespace debatelab
