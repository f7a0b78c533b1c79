#include "debatelab/aggregate.hpp"

#include <algorithm>
#include <map>

#include "debatelab/error.hpp"

namespace debatelab {

namespace {

struct Running {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double x) {
    sum += x;
    ++n;
  }
};

std::vector<HistogramBin> convergence_bins(const std::vector<double>& values, const AggregateOptions& o) {
  return stats::histogram(values, o.bins, o.lo, o.hi).bins;
}

std::vector<double> round_means(std::span<const MetricsRecord* const> records,
                                double RoundMetrics::*field) {
  std::vector<Running> acc;
  for (const MetricsRecord* r : records) {
    const auto& rounds = r->metrics.rounds;
    if (acc.size() < rounds.size()) acc.resize(rounds.size());
    for (std::size_t i = 0; i < rounds.size(); ++i) acc[i].add(rounds[i].*field);
  }
  std::vector<double> out;
  out.reserve(acc.size());
  for (const Running& a : acc) out.push_back(a.n ? a.sum / static_cast<double>(a.n) : 0.0);
  return out;
}

std::vector<double> convergences(std::span<const MetricsRecord* const> records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const MetricsRecord* r : records) out.push_back(r->metrics.final_stance_convergence);
  return out;
}

struct PersonaPool {
  PsychometricMeans weighted;
  int n_reports = 0;
  int n_excluded = 0;

  void add(const PsychometricSummary& s) {
    n_excluded += s.n_excluded;
    if (!s.means || s.n_reports == 0) return;
    const double w = s.n_reports;
    weighted.confidence += w * s.means->confidence;
    weighted.effort += w * s.means->effort;
    weighted.empathy += w * s.means->empathy;
    weighted.dissonance += w * s.means->dissonance;
    n_reports += s.n_reports;
  }

  PsychometricSummary summary() const {
    PsychometricSummary s;
    s.n_reports = n_reports;
    s.n_excluded = n_excluded;
    if (n_reports > 0) {
      const double n = n_reports;
      s.means = PsychometricMeans{weighted.confidence / n, weighted.effort / n,
                                  weighted.empathy / n, weighted.dissonance / n};
    }
    return s;
  }
};

}  // namespace

std::string_view to_string(GroupBy g) {
  switch (g) {
    case GroupBy::contentiousness: return "contentiousness";
    case GroupBy::moderator: return "moderator";
    case GroupBy::persona: return "persona";
  }
  return "?";
}

std::optional<GroupBy> parse_group_by(std::string_view s) {
  for (GroupBy g : {GroupBy::contentiousness, GroupBy::moderator, GroupBy::persona})
    if (to_string(g) == s) return g;
  return std::nullopt;
}

std::string group_label(const MetricsRecord& record, GroupBy by) {
  switch (by) {
    case GroupBy::contentiousness: return record.contentiousness;
    case GroupBy::moderator: return record.moderator;
    case GroupBy::persona: return record.persona_a + " vs " + record.persona_b;
  }
  return {};
}

AggregateReport build_aggregate(std::span<const MetricsRecord> records, const AggregateOptions& options) {
  if (records.empty()) throw TooFewValues("no debates to aggregate");

  std::vector<const MetricsRecord*> all;
  all.reserve(records.size());
  for (const MetricsRecord& r : records) all.push_back(&r);

  AggregateReport report;
  report.n_debates = records.size();
  const std::vector<double> conv = convergences(all);
  if (conv.size() >= 2) {
    const auto ms = stats::mean_std(conv);
    report.convergence_mean = ms.mean;
    report.convergence_std = ms.std;
  } else {
    report.convergence_mean = conv.front();
  }
  report.convergence_histogram = convergence_bins(conv, options);
  report.per_round_diversity_mean = round_means(all, &RoundMetrics::semantic_diversity);
  report.per_round_agreement_mean = round_means(all, &RoundMetrics::stance_agreement);
  report.per_round_bias_mean = round_means(all, &RoundMetrics::avg_bias);

  std::map<std::string, PersonaPool> pools;
  for (const MetricsRecord& r : records) {
    for (Agent a : kDebaters) {
      auto it = r.metrics.psychometrics.find(a);
      if (it == r.metrics.psychometrics.end()) continue;
      pools[a == Agent::debater_a ? r.persona_a : r.persona_b].add(it->second);
    }
  }
  for (const auto& [name, pool] : pools) report.persona_psychometrics[name] = pool.summary();

  for (const MetricsRecord& r : records) report.debates.push_back(r.row());

  if (!options.group_by) return report;
  report.group_by = std::string(to_string(*options.group_by));

  std::map<std::string, std::vector<const MetricsRecord*>> grouped;
  for (const MetricsRecord* r : all) grouped[group_label(*r, *options.group_by)].push_back(r);

  for (const auto& [label, members] : grouped) {
    GroupSummary g;
    g.label = label;
    g.n_debates = members.size();
    const std::vector<double> values = convergences(members);
    if (values.size() >= 2) {
      const auto ms = stats::mean_std(values);
      g.convergence_mean = ms.mean;
      g.convergence_std = ms.std;
    } else {
      g.convergence_mean = values.front();
    }
    g.convergence_histogram = convergence_bins(values, options);
    g.per_round_diversity_mean = round_means(members, &RoundMetrics::semantic_diversity);
    report.groups.push_back(std::move(g));
  }

  if (grouped.size() == 2) {
    auto first = grouped.begin();
    auto second = std::next(first);
    for (auto it : {first, second})
      if (it->second.size() < 2)
        throw TooFewValues("group '" + it->first + "' has " + std::to_string(it->second.size()) +
                           " debate(s); the variance comparison needs at least 2 per group");
    const std::vector<double> a = convergences(first->second);
    const std::vector<double> b = convergences(second->second);
    const stats::LeveneResult res = stats::levene_test(a, b, options.center);
    LeveneRow row;
    row.group_a = first->first;
    row.group_b = second->first;
    row.w = res.w;
    row.p_value = res.p_value;
    row.center = options.center == stats::LeveneCenter::mean ? "mean" : "median";
    row.degenerate = res.degenerate;
    report.levene_results.push_back(std::move(row));
  }
  return report;
}

}  // namespace debatelab
