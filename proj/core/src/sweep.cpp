#include "cutin/sweep.hpp"

#include "cutin/version.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

namespace cutin::sweep {

namespace {

std::string fmt(const char* spec, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string opt_fmt(const char* spec, const std::optional<double>& v)
{
    return v ? fmt(spec, *v) : std::string();
}

void check_axis(const std::vector<double>& axis, const char* name, bool allow_zero)
{
    if (axis.empty()) throw std::invalid_argument(std::string("grid axis '") + name + "' is empty");
    for (double v : axis) {
        if (!std::isfinite(v) || v < 0.0 || (!allow_zero && v == 0.0))
            throw std::invalid_argument(std::string("grid axis '") + name + "' has invalid value " + fmt("%g", v));
    }
}

std::ofstream open_out(const std::filesystem::path& path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::string band_of(double ego_kmh) { return ego_kmh < 65.0 ? "low" : "high"; }

// Key identifying a scenario independent of the model.
using ConfigKey = std::tuple<double, double, double, double>;

ConfigKey key_of(const SweepResult& r) { return {r.ego_kmh, r.cutin_kmh, -r.config.vy, r.config.dx0}; }

}  // namespace

void SweepGrid::validate() const
{
    check_axis(ego_speeds, "ego_speeds", false);
    check_axis(cutin_speeds, "cutin_speeds", true);
    check_axis(lateral_speeds, "lateral_speeds", false);
    check_axis(initial_distances, "initial_distances", false);
}

std::size_t SweepGrid::size() const
{
    std::size_t pairs = 0;
    for (double e : ego_speeds)
        for (double c : cutin_speeds)
            if (c < e) ++pairs;
    return pairs * lateral_speeds.size() * initial_distances.size();
}

std::vector<ScenarioConfig> SweepGrid::configs(const ScenarioConfig& base) const
{
    std::vector<ScenarioConfig> out;
    out.reserve(size());
    for (double e : ego_speeds) {
        for (double c : cutin_speeds) {
            if (c >= e) continue;
            for (double lat : lateral_speeds) {
                for (double d : initial_distances) {
                    ScenarioConfig cfg = base;
                    cfg.ve0 = kmh_to_ms(e);
                    cfg.vo0 = kmh_to_ms(c);
                    cfg.vy = -lat;
                    cfg.dx0 = d;
                    out.push_back(cfg);
                }
            }
        }
    }
    return out;
}

std::uint64_t SweepGrid::hash() const
{
    std::uint64_t h = 1469598103934665603ULL;
    auto feed = [&h](const std::string& s) {
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 1099511628211ULL;
        }
    };
    auto axis = [&](const char* name, const std::vector<double>& v) {
        feed(name);
        for (double x : v) feed(fmt(",%.6g", x));
        feed(";");
    };
    axis("ego", ego_speeds);
    axis("cutin", cutin_speeds);
    axis("lat", lateral_speeds);
    axis("dist", initial_distances);
    return h;
}

std::vector<double> linspace_step(double lo, double hi, double step)
{
    if (!(step > 0.0) || hi < lo) throw std::invalid_argument("linspace_step: need step > 0 and hi >= lo");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::round((lo + step * static_cast<double>(i)) * 1e9) / 1e9;
    return out;
}

std::optional<Preset> parse_preset(std::string_view name)
{
    if (name == "paper-low") return Preset::paper_low;
    if (name == "paper-high") return Preset::paper_high;
    if (name == "fig6") return Preset::fig6;
    if (name == "fig7") return Preset::fig7;
    return std::nullopt;
}

SweepGrid preset_grid(Preset preset)
{
    SweepGrid g;
    g.lateral_speeds = linspace_step(0.3, 2.0, 0.1);
    g.initial_distances = linspace_step(5.0, 93.5, 1.5);
    switch (preset) {
    case Preset::paper_low:
        g.ego_speeds = {10, 20, 30, 40, 50, 60};
        g.cutin_speeds = {10, 20, 30, 40, 50};
        break;
    case Preset::paper_high:
        g.ego_speeds = {70, 90, 110, 130};
        g.cutin_speeds = linspace_step(10, 120, 10);
        break;
    case Preset::fig6:
        g.ego_speeds = {70};
        g.cutin_speeds = {10};
        break;
    case Preset::fig7:
        g.ego_speeds = {90};
        g.cutin_speeds = {10};
        g.lateral_speeds = {1.7};
        g.initial_distances = {41.0};
        break;
    }
    return g;
}

ScenarioConfig fig5_scenario()
{
    ScenarioConfig c;
    c.ve0 = kmh_to_ms(70);
    c.vo0 = kmh_to_ms(10);
    c.vy = -1.5;
    c.dx0 = 92.0;
    return c;
}

ScenarioConfig fig7_scenario()
{
    ScenarioConfig c;
    c.ve0 = kmh_to_ms(90);
    c.vo0 = kmh_to_ms(10);
    c.vy = -1.7;
    c.dx0 = 41.0;
    return c;
}

SweepOutput run_sweep(const SweepGrid& grid, const std::vector<const SafetyModel*>& models,
                      const SafetyParams& params, unsigned threads, const ScenarioConfig& base)
{
    grid.validate();
    params.validate();
    const std::vector<ScenarioConfig> configs = grid.configs(base);
    const std::size_t m = models.size();
    const std::size_t total = configs.size() * m;

    // Recover the km/h labels exactly as given in the grid.
    std::vector<std::pair<double, double>> labels;
    labels.reserve(configs.size());
    for (double e : grid.ego_speeds)
        for (double c : grid.cutin_speeds)
            if (c < e)
                for (std::size_t i = 0; i < grid.lateral_speeds.size() * grid.initial_distances.size(); ++i)
                    labels.emplace_back(e, c);

    std::vector<std::optional<SweepResult>> slots(total);
    std::vector<std::optional<std::string>> errors(total);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        std::vector<std::unique_ptr<SafetyModel>> local;
        local.reserve(m);
        for (const SafetyModel* model : models) local.push_back(model->clone());
        for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
            const std::size_t ci = i / m;
            const std::size_t mi = i % m;
            try {
                const sim::Trace trace = sim::run_scenario(configs[ci], *local[mi], params);
                SweepResult r;
                r.config = configs[ci];
                r.model_id = std::string(local[mi]->id());
                r.ego_kmh = labels[ci].first;
                r.cutin_kmh = labels[ci].second;
                r.crash = trace.crash;
                r.min_ttc = trace.min_ttc;
                r.detection_time = trace.detection_time;
                r.first_decel_time = trace.first_decel_time();
                r.max_jerk = trace.max_abs_jerk();
                r.max_decel = trace.max_decel();
                slots[i] = std::move(r);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };

    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(total, 1))));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n);
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    }

    SweepOutput out;
    out.results.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
        if (slots[i]) {
            out.results.push_back(std::move(*slots[i]));
        } else {
            out.diagnostics.push_back({configs[i / m], std::string(models[i % m]->id()),
                                       errors[i].value_or("unknown failure")});
        }
    }
    return out;
}

bool ResultFilter::matches(const SweepResult& r) const
{
    if (model_id && r.model_id != *model_id) return false;
    if (ego_kmh && r.ego_kmh != *ego_kmh) return false;
    if (cutin_kmh && r.cutin_kmh != *cutin_kmh) return false;
    if (min_ego_kmh && r.ego_kmh < *min_ego_kmh) return false;
    if (max_ego_kmh && r.ego_kmh > *max_ego_kmh) return false;
    return true;
}

std::string ResultFilter::describe() const
{
    std::string s;
    auto add = [&s](const std::string& part) { s += (s.empty() ? "" : ", ") + part; };
    if (model_id) add("model=" + *model_id);
    if (ego_kmh) add("ego=" + fmt("%g", *ego_kmh));
    if (cutin_kmh) add("cutin=" + fmt("%g", *cutin_kmh));
    if (min_ego_kmh) add("ego>=" + fmt("%g", *min_ego_kmh));
    if (max_ego_kmh) add("ego<=" + fmt("%g", *max_ego_kmh));
    return s.empty() ? "all" : s;
}

double crash_percentage(const std::vector<SweepResult>& results, const ResultFilter& filter)
{
    std::size_t n = 0, crashes = 0;
    for (const auto& r : results) {
        if (!filter.matches(r)) continue;
        ++n;
        if (r.crash) ++crashes;
    }
    if (n == 0) throw std::invalid_argument("crash_percentage: no results match filter [" + filter.describe() + "]");
    return 100.0 * static_cast<double>(crashes) / static_cast<double>(n);
}

std::optional<double> average_min_ttc(const std::vector<SweepResult>& results, const ResultFilter& filter)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : results) {
        if (!filter.matches(r) || r.crash || !r.min_ttc) continue;
        sum += *r.min_ttc;
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

SubsetReport crash_subset_check(const std::vector<SweepResult>& a, const std::vector<SweepResult>& b)
{
    std::map<ConfigKey, const SweepResult*> in_b;
    for (const auto& r : b) in_b[key_of(r)] = &r;
    std::set<ConfigKey> keys_a;
    for (const auto& r : a) keys_a.insert(key_of(r));
    if (keys_a.size() != a.size() || in_b.size() != b.size())
        throw std::invalid_argument("crash_subset_check: duplicate configs within one result set");
    if (keys_a.size() != in_b.size())
        throw std::invalid_argument("crash_subset_check: result sets cover different configs");

    SubsetReport report;
    for (const auto& r : a) {
        auto it = in_b.find(key_of(r));
        if (it == in_b.end()) throw std::invalid_argument("crash_subset_check: result sets cover different configs");
        if (r.crash) {
            ++report.crashes_a;
            if (!it->second->crash) {
                report.is_subset = false;
                report.counterexamples.push_back(r.config);
            }
        }
    }
    for (const auto& r : b)
        if (r.crash) ++report.crashes_b;
    return report;
}

std::optional<double> detection_advantage(const sim::Trace& trace_dbn, const sim::Trace& trace_cc)
{
    if (!trace_dbn.detection_time || !trace_cc.detection_time) return std::nullopt;
    return *trace_cc.detection_time - *trace_dbn.detection_time;
}

std::optional<double> detection_advantage(const SweepResult& dbn, const SweepResult& cc)
{
    if (!dbn.detection_time || !cc.detection_time) return std::nullopt;
    return *cc.detection_time - *dbn.detection_time;
}

std::string ExportHeader::render() const
{
    std::ostringstream s;
    s << "# cutin-bench " << (version.empty() ? std::string(kVersion) : version) << '\n';
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(grid_hash));
    s << "# grid_hash " << hash << '\n';
    s << "# params cc_rt=" << fmt("%g", params.cc_rt) << " cc_min_jerk=" << fmt("%g", params.cc_min_jerk)
      << " cc_max_deceleration=" << fmt("%.4f", params.cc_max_deceleration)
      << " cc_release_deceleration=" << fmt("%g", params.cc_release_deceleration)
      << " cc_critical_ttc=" << fmt("%g", params.cc_critical_ttc)
      << " a_comfort_max=" << fmt("%g", params.a_comfort_max) << '\n';
    return s.str();
}

Rgb heatmap_color(std::optional<double> min_ttc, bool crash)
{
    if (crash) return {0, 0, 0};
    const double t = std::clamp(min_ttc.value_or(4.0), 0.0, 4.0) / 4.0;
    return {static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - t))), static_cast<std::uint8_t>(std::lround(255.0 * t)),
            0};
}

void export_heatmap(const std::vector<SweepResult>& results, const std::string& model_id,
                    const std::filesystem::path& prefix, const ExportHeader& header)
{
    std::vector<const SweepResult*> cells;
    for (const auto& r : results)
        if (r.model_id == model_id) cells.push_back(&r);
    if (cells.empty()) throw std::invalid_argument("export_heatmap: no results for model '" + model_id + "'");

    std::set<double> lats, dists;
    std::map<std::pair<double, double>, const SweepResult*> grid;
    for (const auto* c : cells) {
        if (c->ego_kmh != cells.front()->ego_kmh || c->cutin_kmh != cells.front()->cutin_kmh)
            throw std::invalid_argument("export_heatmap: results span several speed pairs");
        const double lat = -c->config.vy;
        lats.insert(lat);
        dists.insert(c->config.dx0);
        if (!grid.emplace(std::make_pair(lat, c->config.dx0), c).second)
            throw std::invalid_argument("export_heatmap: duplicate cell");
    }
    if (grid.size() != lats.size() * dists.size())
        throw std::invalid_argument("export_heatmap: grid is not rectangular in lateral speed x distance");

    std::filesystem::path csv_path = prefix;
    csv_path += ".csv";
    std::filesystem::path ppm_path = prefix;
    ppm_path += ".ppm";

    std::ofstream csv = open_out(csv_path);
    csv << header.render();
    csv << "# model " << model_id << " ego_kmh " << fmt("%g", cells.front()->ego_kmh) << " cutin_kmh "
        << fmt("%g", cells.front()->cutin_kmh) << '\n';
    csv << "lateral_speed";
    for (double d : dists) csv << ',' << fmt("%g", d);
    csv << '\n';
    for (double lat : lats) {
        csv << fmt("%g", lat);
        for (double d : dists) {
            const SweepResult* r = grid.at({lat, d});
            csv << ',';
            if (r->crash)
                csv << 'X';
            else if (r->min_ttc)
                csv << fmt("%.2f", *r->min_ttc);
            else
                csv << "NA";
        }
        csv << '\n';
    }

    std::ofstream ppm = open_out(ppm_path);
    ppm << "P3\n";
    std::istringstream lines(header.render());
    for (std::string line; std::getline(lines, line);) ppm << line << '\n';
    ppm << dists.size() << ' ' << lats.size() << "\n255\n";
    for (double lat : lats) {
        bool first = true;
        for (double d : dists) {
            const SweepResult* r = grid.at({lat, d});
            const Rgb c = heatmap_color(r->min_ttc, r->crash);
            ppm << (first ? "" : " ") << int(c.r) << ' ' << int(c.g) << ' ' << int(c.b);
            first = false;
        }
        ppm << '\n';
    }
}

void profile_report(const std::vector<NamedTrace>& traces, const std::filesystem::path& path,
                    const ExportHeader& header)
{
    std::ofstream out = open_out(path);
    out << header.render();
    out << "t";
    for (const auto& nt : traces) out << ',' << nt.model_id << "_v," << nt.model_id << "_a," << nt.model_id << "_jerk";
    out << '\n';

    std::size_t rows = 0;
    double dt = 0.1;
    for (const auto& nt : traces) {
        rows = std::max(rows, nt.trace.ticks.size());
        if (nt.trace.ticks.size() > 1) dt = nt.trace.ticks[1].time - nt.trace.ticks[0].time;
    }
    for (std::size_t k = 0; k < rows; ++k) {
        out << fmt("%.2f", static_cast<double>(k) * dt);
        for (const auto& nt : traces) {
            const auto& ticks = nt.trace.ticks;
            if (k < ticks.size()) {
                const double jerk = k == 0 ? 0.0 : (ticks[k].ego.a_long - ticks[k - 1].ego.a_long) / dt;
                out << ',' << fmt("%.4f", ticks[k].ego.v_long) << ',' << fmt("%.4f", ticks[k].ego.a_long) << ','
                    << fmt("%.4f", jerk);
            } else {
                out << ",,,";
            }
        }
        out << '\n';
    }
    out << "summary,model,max_abs_jerk,max_decel,first_decel_time,detection_time,crash\n";
    for (const auto& nt : traces) {
        out << "summary," << nt.model_id << ',' << fmt("%.4f", nt.trace.max_abs_jerk()) << ','
            << fmt("%.4f", nt.trace.max_decel()) << ',' << opt_fmt("%.2f", nt.trace.first_decel_time()) << ','
            << opt_fmt("%.2f", nt.trace.detection_time) << ',' << (nt.trace.crash ? 1 : 0) << '\n';
    }
}

void write_summary_csv(const std::vector<SweepResult>& results, const std::filesystem::path& path,
                       const ExportHeader& header)
{
    // Model order follows first appearance; bands are low then high.
    std::vector<std::string> order;
    for (const auto& r : results)
        if (std::find(order.begin(), order.end(), r.model_id) == order.end()) order.push_back(r.model_id);

    std::ofstream out = open_out(path);
    out << header.render();
    out << "model,band,scenarios,crashes,crash_pct,avg_min_ttc\n";
    for (const auto& model : order) {
        for (const char* band : {"low", "high"}) {
            std::size_t n = 0, crashes = 0;
            double ttc_sum = 0.0;
            std::size_t ttc_n = 0;
            for (const auto& r : results) {
                if (r.model_id != model || band_of(r.ego_kmh) != band) continue;
                ++n;
                if (r.crash) {
                    ++crashes;
                } else if (r.min_ttc) {
                    ttc_sum += *r.min_ttc;
                    ++ttc_n;
                }
            }
            if (n == 0) continue;
            out << model << ',' << band << ',' << n << ',' << crashes << ','
                << fmt("%.2f", 100.0 * static_cast<double>(crashes) / static_cast<double>(n)) << ','
                << (ttc_n ? fmt("%.3f", ttc_sum / static_cast<double>(ttc_n)) : std::string()) << '\n';
        }
    }
}

void write_per_speed_csv(const std::vector<SweepResult>& results, const std::filesystem::path& path,
                         const ExportHeader& header)
{
    std::vector<std::string> order;
    for (const auto& r : results)
        if (std::find(order.begin(), order.end(), r.model_id) == order.end()) order.push_back(r.model_id);

    struct Acc {
        std::size_t n = 0, crashes = 0, ttc_n = 0;
        double ttc_sum = 0.0;
    };
    std::map<std::tuple<std::size_t, double, double>, Acc> acc;
    for (const auto& r : results) {
        const auto mi = static_cast<std::size_t>(std::find(order.begin(), order.end(), r.model_id) - order.begin());
        Acc& a = acc[{mi, r.ego_kmh, r.cutin_kmh}];
        ++a.n;
        if (r.crash) {
            ++a.crashes;
        } else if (r.min_ttc) {
            a.ttc_sum += *r.min_ttc;
            ++a.ttc_n;
        }
    }

    std::ofstream out = open_out(path);
    out << header.render();
    out << "model,ego_kmh,cutin_kmh,scenarios,crashes,crash_pct,avoidance_pct,avg_min_ttc\n";
    for (const auto& [key, a] : acc) {
        const double pct = 100.0 * static_cast<double>(a.crashes) / static_cast<double>(a.n);
        out << order[std::get<0>(key)] << ',' << fmt("%g", std::get<1>(key)) << ',' << fmt("%g", std::get<2>(key))
            << ',' << a.n << ',' << a.crashes << ',' << fmt("%.2f", pct) << ',' << fmt("%.2f", 100.0 - pct) << ','
            << (a.ttc_n ? fmt("%.3f", a.ttc_sum / static_cast<double>(a.ttc_n)) : std::string()) << '\n';
    }
}

}  // namespace cutin::sweep
