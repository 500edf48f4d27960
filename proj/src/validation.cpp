#include "citevec/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "citevec/errors.hpp"
#include "table_reader.hpp"

namespace citevec {
namespace {

double pairs(std::size_t n) {
  const auto x = static_cast<double>(n);
  return x * (x - 1.0) / 2.0;
}

std::string fixed(double x, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

ContingencyTable tabulate(std::span<const int> rows, std::span<const int> cols) {
  ContingencyTable t;
  t.clusters.assign(rows.begin(), rows.end());
  t.classes.assign(cols.begin(), cols.end());
  std::sort(t.clusters.begin(), t.clusters.end());
  t.clusters.erase(std::unique(t.clusters.begin(), t.clusters.end()), t.clusters.end());
  std::sort(t.classes.begin(), t.classes.end());
  t.classes.erase(std::unique(t.classes.begin(), t.classes.end()), t.classes.end());
  t.counts.assign(t.clusters.size() * t.classes.size(), 0);
  t.row_totals.assign(t.clusters.size(), 0);
  t.col_totals.assign(t.classes.size(), 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = *t.row_of(rows[i]);
    const auto c = *t.col_of(cols[i]);
    ++t.counts[r * t.classes.size() + c];
    ++t.row_totals[r];
    ++t.col_totals[c];
  }
  t.total = rows.size();
  return t;
}

}  // namespace

Labels load_labels(const std::filesystem::path& path, const TableFormat& format,
                   const LabelColumns& columns) {
  detail::DelimitedFile file(path, format.delimiter);
  const auto c_id = file.column(columns.id);
  const auto c_cls = file.column(columns.class_code);
  Labels labels;
  std::vector<std::string_view> f;
  while (file.next(f)) {
    if (f.size() <= std::max(c_id, c_cls))
      throw InputError(file.where() + "missing patent_id/class field");
    auto id = detail::parse_int<PatentId>(f[c_id]);
    auto cls = detail::parse_int<int>(f[c_cls]);
    if (!id || !cls) throw InputError(file.where() + "non-integer patent id or class");
    auto [it, inserted] = labels.emplace(*id, *cls);
    if (!inserted && it->second != *cls)
      throw InputError(file.where() + "patent " + std::to_string(*id) +
                       " labelled with two classes");
  }
  return labels;
}

std::optional<std::size_t> ContingencyTable::row_of(int cluster) const {
  auto it = std::lower_bound(clusters.begin(), clusters.end(), cluster);
  if (it == clusters.end() || *it != cluster) return std::nullopt;
  return static_cast<std::size_t>(it - clusters.begin());
}

std::optional<std::size_t> ContingencyTable::col_of(int cls) const {
  auto it = std::lower_bound(classes.begin(), classes.end(), cls);
  if (it == classes.end() || *it != cls) return std::nullopt;
  return static_cast<std::size_t>(it - classes.begin());
}

ContingencyTable contingency(const Assignment& assignment, const Labels& labels) {
  std::vector<int> rows, cols;
  std::size_t unlabeled = 0;
  for (std::size_t i = 0; i < assignment.ids.size(); ++i) {
    auto it = labels.find(assignment.ids[i]);
    if (it == labels.end()) {
      ++unlabeled;
      continue;
    }
    rows.push_back(assignment.labels[i]);
    cols.push_back(it->second);
  }
  if (rows.empty()) throw ContractError("contingency: no labelled patent in the assignment");
  auto t = tabulate(rows, cols);
  t.unlabeled = unlabeled;
  return t;
}

ContingencyTable contingency(std::span<const int> rows, std::span<const int> cols) {
  if (rows.size() != cols.size())
    throw ContractError("contingency: label vectors differ in length");
  if (rows.empty()) throw ContractError("contingency: empty input");
  return tabulate(rows, cols);
}

std::optional<double> pearson_phi(const ContingencyTable& table, int cluster, int cls) {
  const auto r = table.row_of(cluster);
  const auto c = table.col_of(cls);
  const auto n = static_cast<double>(table.total);
  const double row = r ? static_cast<double>(table.row_totals[*r]) : 0.0;
  const double col = c ? static_cast<double>(table.col_totals[*c]) : 0.0;
  if (row == 0.0 || row == n || col == 0.0 || col == n) return std::nullopt;
  const double both = static_cast<double>(table.at(*r, *c));
  const double phi =
      (n * both - row * col) / std::sqrt(row * (n - row) * col * (n - col));
  return std::clamp(phi, -1.0, 1.0);
}

double adjusted_rand(const ContingencyTable& t) {
  if (t.total < 2) throw ContractError("adjusted_rand: need at least 2 elements");
  double index = 0.0, a = 0.0, b = 0.0;
  for (auto x : t.counts) index += pairs(x);
  for (auto x : t.row_totals) a += pairs(x);
  for (auto x : t.col_totals) b += pairs(x);
  const double expected = a * b / pairs(t.total);
  const double max = (a + b) / 2.0;
  if (max == expected) return 1.0;
  return (index - expected) / (max - expected);
}

double adjusted_rand(const Assignment& assignment, const Labels& labels) {
  return adjusted_rand(contingency(assignment, labels));
}

double adjusted_rand(std::span<const int> a, std::span<const int> b) {
  return adjusted_rand(contingency(a, b));
}

const ClassEmergence* EmergenceReport::find(int cls) const {
  for (const auto& c : classes)
    if (c.cls == cls) return &c;
  return nullptr;
}

EmergenceReport backtest(const ClusterTimeline& timeline, const Labels& labels,
                         Date label_date, double phi_min, std::span<const int> classes) {
  if (!(phi_min > 0.0 && phi_min <= 1.0)) throw ConfigError("phi_min must be in (0, 1]");
  EmergenceReport report;
  report.label_date = label_date;
  report.phi_min = phi_min;

  std::vector<int> targets(classes.begin(), classes.end());
  if (targets.empty()) {
    std::set<int> all;
    for (const auto& [id, cls] : labels) all.insert(cls);
    targets.assign(all.begin(), all.end());
  }

  std::vector<std::optional<ContingencyTable>> tables;
  for (const auto& a : timeline.assignments) {
    try {
      tables.push_back(contingency(a, labels));
    } catch (const ContractError&) {
      tables.push_back(std::nullopt);
    }
  }

  for (int cls : targets) {
    ClassEmergence ce;
    ce.cls = cls;
    for (std::size_t s = 0; s < timeline.dates.size(); ++s) {
      SnapshotPhi sp;
      sp.date = timeline.dates[s];
      if (const auto& t = tables[s]) {
        if (auto col = t->col_of(cls)) sp.class_size = t->col_totals[*col];
        for (std::size_t r = 0; r < t->clusters.size(); ++r) {
          auto phi = pearson_phi(*t, t->clusters[r], cls);
          if (phi && (!sp.phi || *phi > *sp.phi)) {
            sp.phi = phi;
            sp.best_cluster = t->clusters[r];
            sp.cluster_size = t->row_totals[r];
          }
        }
      }
      if (!ce.detected_at && sp.phi && *sp.phi >= phi_min) {
        ce.detected_at = sp.date;
        ce.lead_days = label_date.days() - sp.date.days();
      }
      ce.snapshots.push_back(sp);
    }
    report.classes.push_back(std::move(ce));
  }
  return report;
}

void write_report_text(const EmergenceReport& report, std::ostream& out) {
  out << "# emergence backtest; label date " << report.label_date.iso() << ", phi_min "
      << fixed(report.phi_min, 3) << '\n';
  for (const auto& c : report.classes) {
    out << "class " << c.cls << ": ";
    if (c.detected()) {
      out << "detected " << c.detected_at->iso() << ", lead " << *c.lead_days << " days ("
          << fixed(*c.lead_days / 365.25, 2) << " years)\n";
    } else {
      out << "not detected\n";
    }
    for (const auto& s : c.snapshots) {
      out << "  " << s.date.iso() << "  ";
      if (s.phi)
        out << "phi " << fixed(*s.phi) << "  cluster " << *s.best_cluster << " (size "
            << s.cluster_size << ", class size " << s.class_size << ")\n";
      else
        out << "phi n/a\n";
    }
  }
}

void write_report_table(const EmergenceReport& report, std::ostream& out) {
  out << "class\tdate\tbest_cluster\tphi\tclass_size\tcluster_size\tdetected\n";
  for (const auto& c : report.classes) {
    for (const auto& s : c.snapshots) {
      out << c.cls << '\t' << s.date.iso() << '\t'
          << (s.best_cluster ? std::to_string(*s.best_cluster) : "") << '\t'
          << (s.phi ? fixed(*s.phi, 6) : "") << '\t' << s.class_size << '\t'
          << s.cluster_size << '\t'
          << (s.phi && *s.phi >= report.phi_min ? 1 : 0) << '\n';
    }
  }
}

}  // namespace citevec
