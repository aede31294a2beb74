#include "nilmaug/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace nilmaug {

ErrorReport mse_rmse(const PowerSeries& truth, const PowerSeries& candidate) {
  if (truth.period != candidate.period)
    throw DataError("mse: series periods differ (" + std::to_string(truth.period) + " s vs " +
                    std::to_string(candidate.period) + " s)");
  if ((candidate.start - truth.start) % truth.period != 0) throw DataError("mse: series grids are not aligned");

  double sum = 0.0;
  std::size_t n = 0;
  auto a = truth.samples.begin();
  auto b = candidate.samples.begin();
  while (a != truth.samples.end() && b != candidate.samples.end()) {
    const std::int64_t ta = truth.timestamp(a->offset);
    const std::int64_t tb = candidate.timestamp(b->offset);
    if (ta < tb) {
      ++a;
    } else if (tb < ta) {
      ++b;
    } else {
      const double d = a->real_w - b->real_w;
      sum += d * d;
      ++n;
      ++a;
      ++b;
    }
  }
  if (n == 0) throw DataError("mse: series have no timestamps in common");
  ErrorReport r;
  r.n = n;
  r.mse = sum / static_cast<double>(n);
  r.rmse = std::sqrt(r.mse);
  return r;
}

void OnOffRule::validate() const {
  if (interval <= 0) throw ConfigError("on/off interval must be positive");
  if (!(on_threshold > 0.0)) throw ConfigError("on/off threshold must be positive");
}

double f_measure(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

ApplianceScore score_counts(std::string name, std::size_t tp, std::size_t fp, std::size_t fn) {
  ApplianceScore a;
  a.name = std::move(name);
  a.tp = tp;
  a.fp = fp;
  a.fn = fn;
  a.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  a.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  a.f = f_measure(a.precision, a.recall);
  return a;
}

namespace {

struct IntervalMeans {
  std::vector<double> sum;
  std::vector<std::size_t> count;
};

IntervalMeans interval_means(const PowerSeries& s, std::int64_t from, std::int64_t interval, std::size_t n) {
  IntervalMeans m{std::vector<double>(n, 0.0), std::vector<std::size_t>(n, 0)};
  for (const Sample& smp : s.samples) {
    const std::int64_t t = s.timestamp(smp.offset);
    if (t < from) continue;
    const auto k = static_cast<std::size_t>((t - from) / interval);
    if (k >= n) break;
    m.sum[k] += smp.real_w;
    ++m.count[k];
  }
  return m;
}

}  // namespace

FScoreReport fscore(const std::map<std::string, PowerSeries>& estimates, const std::vector<ApplianceTrace>& truth,
                    const OnOffRule& rule) {
  rule.validate();
  FScoreReport report;
  for (const auto& [name, est] : estimates) {
    auto it = std::find_if(truth.begin(), truth.end(), [&](const ApplianceTrace& t) { return t.appliance == name; });
    if (it == truth.end()) throw DataError("no ground-truth trace for estimated appliance '" + name + "'");
    const PowerSeries& gt = it->series;

    std::size_t tp = 0, fp = 0, fn = 0;
    if (!est.empty() && !gt.empty()) {
      const std::int64_t from = std::max(est.timestamp_of(0), gt.timestamp_of(0));
      const std::int64_t to = std::min(est.timestamp_of(est.size() - 1) + est.period,
                                       gt.timestamp_of(gt.size() - 1) + gt.period);
      if (to > from) {
        const auto n = static_cast<std::size_t>((to - from + rule.interval - 1) / rule.interval);
        const IntervalMeans e = interval_means(slice(est, from, to), from, rule.interval, n);
        const IntervalMeans g = interval_means(slice(gt, from, to), from, rule.interval, n);
        for (std::size_t k = 0; k < n; ++k) {
          if (e.count[k] == 0 || g.count[k] == 0) continue;
          const bool est_on = e.sum[k] / static_cast<double>(e.count[k]) > rule.on_threshold;
          const bool gt_on = g.sum[k] / static_cast<double>(g.count[k]) > rule.on_threshold;
          if (est_on && gt_on) ++tp;
          else if (est_on) ++fp;
          else if (gt_on) ++fn;
        }
      }
    }
    report.appliances.push_back(score_counts(name, tp, fp, fn));
  }

  if (!report.appliances.empty()) {
    double sum = 0.0;
    for (const auto& a : report.appliances) sum += a.f;
    report.avg = sum / static_cast<double>(report.appliances.size());
    double var = 0.0;
    for (const auto& a : report.appliances) var += (a.f - report.avg) * (a.f - report.avg);
    report.dev = std::sqrt(var / static_cast<double>(report.appliances.size()));
  }
  return report;
}

std::map<ApplianceGroup, double> group_report(const FScoreReport& f) {
  std::map<ApplianceGroup, std::pair<double, std::size_t>> acc;
  for (const auto& a : f.appliances) {
    auto& [sum, n] = acc[group_of(a.name)];
    sum += a.f;
    ++n;
  }
  std::map<ApplianceGroup, double> out;
  for (const auto& [g, sn] : acc) out[g] = sn.first / static_cast<double>(sn.second);
  return out;
}

nlohmann::ordered_json report_json(const std::string& method, const std::optional<ErrorReport>& error,
                                   const FScoreReport& f) {
  nlohmann::ordered_json j;
  j["method"] = method;
  if (error) {
    j["mse"] = error->mse;
    j["rmse"] = error->rmse;
  } else {
    j["mse"] = nullptr;
    j["rmse"] = nullptr;
  }
  j["appliances"] = nlohmann::ordered_json::array();
  for (const auto& a : f.appliances)
    j["appliances"].push_back({{"name", a.name}, {"p", a.precision}, {"r", a.recall}, {"f", a.f}});
  j["avg"] = f.avg;
  j["dev"] = f.dev;
  nlohmann::ordered_json groups = nlohmann::ordered_json::object();
  for (const auto& [g, v] : group_report(f)) groups[to_string(g)] = v;
  j["groups"] = groups;
  return j;
}

}  // namespace nilmaug
