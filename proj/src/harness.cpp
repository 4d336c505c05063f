#include "piperate/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "piperate/control_agents.hpp"
#include "piperate/coordstore.hpp"
#include "piperate/event_engine.hpp"
#include "piperate/resource_manager.hpp"
#include "piperate/simcluster.hpp"

namespace piperate {

namespace {

std::string format_rate(double rate_bps) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", rate_bps);
    return buf;
}

// Smallest poll timestamp k*P >= t.
SimTime first_poll_at_or_after(SimTime t, SimTime poll) {
    return ((t + poll - 1) / poll) * poll;
}

struct PipeTrace {
    std::string container;
    SimTime container_start = 0;
    SimTime open_time = 0;
    bool shaped = false;  // container had a positive rate class at open
    std::optional<SimTime> detected;
    std::optional<SimTime> submitted;
    std::optional<SimTime> applied;
    std::int64_t applied_rate = 0;
};

/*
 * One scenario execution: event engine, coordination store, cluster data
 * plane, resource manager, and (when shaping is on) one DataNodeAgent per
 * DataNode host plus one NodeManagerAgent per NodeManager host. Containers
 * read their file's blocks sequentially, one pipe per block.
 */
class SimulationRun {
public:
    SimulationRun(const ScenarioConfig& cfg, std::string name)
        : cfg_(cfg), name_(std::move(name)), store_(engine_, cfg.parameters.watch_latency) {}

    Result<RunOutput, RunError> execute() {
        auto built = Cluster::build(cfg_);
        if (!built.ok()) return RunError{kExitValidation, built.error()};
        cluster_ = std::move(built.value());

        for (const MachineConfig& m : cfg_.machines) {
            ResourceSpec cap{m.vcores, m.memory, 0};
            for (const DiskConfig& d : m.disks) cap.io_rate += d.capacity;
            rm_.add_host(m.host, cap);
        }
        for (const ContainerClassConfig& c : cfg_.container_classes)
            rm_.add_class(c.class_name, ResourceSpec{c.vcores, c.memory, c.io_rate});

        AgentHooks hooks;
        hooks.on_detected = [this](const PipeKey& key, const std::string&, SimTime now) {
            auto& tr = traces_.at(key.render());
            if (!tr.detected) tr.detected = now;
        };
        hooks.on_submitted = [this](const PipeKey& key, SimTime now) {
            auto& tr = traces_.at(key.render());
            if (!tr.submitted) tr.submitted = now;
        };
        hooks.on_rule_applied = [this](const PipeKey& key, std::int64_t rate, SimTime now) {
            auto& tr = traces_.at(key.render());
            if (!tr.applied) {
                tr.applied = now;
                tr.applied_rate = rate;
            }
        };

        if (cfg_.shaping_enabled) {
            for (const std::string& host : cluster_->datanode_hosts())
                dn_agents_.push_back(std::make_unique<DataNodeAgent>(
                    host, store_, cluster_->shaper(host), hooks));
            for (auto& agent : dn_agents_) agent->start(0);
            for (const std::string& host : cluster_->nodemanager_hosts())
                nm_agents_.push_back(std::make_unique<NodeManagerAgent>(
                    host, *cluster_, rm_, store_, hooks));
        }

        for (const ContainerRequestConfig& req : cfg_.container_requests) {
            containers_[req.container_id] =
                ContainerRun{req.container_id, req.class_name, req.host, req.file, {}, 0};
            engine_.schedule_at(req.start_time,
                                [this, id = req.container_id] { start_container(id); });
        }
        for (auto& agent : nm_agents_) schedule_tick(agent.get(), 0);
        if (cfg_.parameters.dt <= cfg_.parameters.sim_duration) schedule_step(0);

        engine_.run_until(cfg_.parameters.sim_duration);

        finalize();
        return std::move(out_);
    }

private:
    struct ContainerRun {
        std::string id;
        std::string class_name;
        std::string host;
        std::string file;
        std::vector<BlockRef> blocks;
        std::size_t next_block = 0;
    };

    void schedule_tick(NodeManagerAgent* agent, SimTime at) {
        engine_.schedule_at(at, [this, agent, at] {
            agent->tick(at);
            const SimTime next = at + cfg_.parameters.poll_interval;
            if (next < cfg_.parameters.sim_duration) schedule_tick(agent, next);
        });
    }

    void schedule_step(SimTime at) {
        engine_.schedule_at(at, [this, at] {
            do_step(at);
            const SimTime next = at + cfg_.parameters.dt;
            if (next + cfg_.parameters.dt <= cfg_.parameters.sim_duration)
                schedule_step(next);
        });
    }

    void start_container(const std::string& id) {
        ContainerRun& c = containers_.at(id);
        auto admitted = rm_.admit(id, c.class_name, c.host);
        if (!admitted.ok()) {
            out_.admission_lines.push_back(id + " error " + to_string(admitted.error()));
            return;
        }
        if (!admitted.value().accepted) {
            out_.admission_lines.push_back(
                id + " rejected (" + to_string(*admitted.value().reject_reason) + ")");
            return;
        }
        out_.admission_lines.push_back(id + " accepted on " + c.host);
        rm_.start_container(id);
        cluster_->register_container(id, c.host);
        container_starts_[id] = engine_.now();
        auto blocks = cluster_->locate_blocks(c.file);
        c.blocks = std::move(blocks.value());  // file validated at load
        open_next_block(id);
    }

    void open_next_block(const std::string& id) {
        ContainerRun& c = containers_.at(id);
        if (c.next_block >= c.blocks.size()) {
            rm_.finish_container(id);
            cluster_->container_finished(id);
            return;
        }
        auto key = cluster_->open_pipe(id, c.blocks[c.next_block].block_id, engine_.now());
        if (!key.ok()) return;
        ++c.next_block;
        PipeTrace trace;
        trace.container = id;
        trace.container_start = container_starts_.at(id);
        trace.open_time = engine_.now();
        auto entry = rm_.registry_lookup(id);
        trace.shaped = cfg_.shaping_enabled && entry && entry->io_rate > 0;
        traces_[key.value().render()] = trace;
    }

    void do_step(SimTime at) {
        const SimTime dt = cfg_.parameters.dt;
        const double dt_s = to_seconds(dt);
        auto step = cluster_->advance(at, dt);
        const SimTime sample_time = at + dt;
        for (const auto& s : step.samples)
            out_.samples.push_back(
                SampleRow{sample_time, s.pipe->key_render, s.delivered_bytes / dt_s});
        for (const Pipe* p : step.closed) {
            close_times_[p->key_render] = sample_time;
            engine_.schedule_at(sample_time,
                                [this, id = p->container_id] { open_next_block(id); });
        }
    }

    void finalize() {
        const Parameters& par = cfg_.parameters;

        std::map<std::string, std::vector<SampleRow>> by_pipe;
        for (const SampleRow& row : out_.samples) by_pipe[row.pipe].push_back(row);

        for (const Pipe* p : cluster_->all_pipes()) {
            PipeSummary ps;
            ps.pipe = p->key_render;
            ps.container = p->container_id;
            ps.block = p->block_id;
            ps.delivered_bytes = p->delivered_bytes();
            ps.open_time = p->start_time;
            auto cit = close_times_.find(p->key_render);
            if (cit != close_times_.end()) ps.close_time = cit->second;
            const auto& series = by_pipe[p->key_render];
            if (!series.empty()) {
                double sum = 0;
                for (const auto& s : series) sum += s.rate_bps;
                ps.mean_rate = sum / static_cast<double>(series.size());
                ps.steady_rate = steady_state_mean(series, par.dt);
            }
            out_.pipes.push_back(std::move(ps));
        }
        std::sort(out_.pipes.begin(), out_.pipes.end(),
                  [](const PipeSummary& a, const PipeSummary& b) { return a.pipe < b.pipe; });

        if (cfg_.shaping_enabled) {
            for (const auto& [pipe, tr] : traces_) {
                if (!tr.shaped) continue;  // no rate class, nothing to enforce
                if (!tr.applied) {
                    out_.never_controlled.push_back(pipe);
                    continue;
                }
                TimelineRow row;
                row.pipe = pipe;
                const SimTime first_poll =
                    first_poll_at_or_after(tr.open_time, par.poll_interval);
                row.t1 = first_poll - tr.container_start;
                row.t2 = *tr.detected - first_poll;
                row.t3 = *tr.submitted - *tr.detected;
                row.t4 = *tr.applied - *tr.submitted;

                const double threshold = 1.05 * static_cast<double>(tr.applied_rate);
                const auto& series = by_pipe[pipe];
                const SampleRow* last_before = nullptr;
                const SampleRow* first_after_ok = nullptr;
                for (const auto& s : series) {
                    if (s.time <= *tr.applied) {
                        last_before = &s;
                    } else if (!first_after_ok && s.rate_bps <= threshold) {
                        first_after_ok = &s;
                    }
                }
                if (last_before && last_before->rate_bps <= threshold) {
                    row.t5 = 0;
                } else if (first_after_ok) {
                    row.t5 = first_after_ok->time - *tr.applied;
                } else {
                    // Closed (or run ended) before the limit became visible.
                    out_.never_controlled.push_back(pipe);
                    continue;
                }
                row.total = row.t1 + row.t2 + row.t3 + row.t4 + row.t5;
                out_.timeline.push_back(std::move(row));
            }
        }

        for (const auto& agent : nm_agents_) {
            out_.store_writes += agent->store_writes();
            out_.submit_failures += agent->submit_failures();
        }
        for (const auto& agent : dn_agents_) {
            out_.parse_failures += agent->parse_failures();
            out_.executor_skips += agent->executor_skips();
        }

        out_.summary_text = render_summary();
    }

    std::string render_summary() {
        const Parameters& par = cfg_.parameters;
        std::ostringstream s;
        s << "scenario: " << name_ << "\n";
        s << "shaping: " << (cfg_.shaping_enabled ? "enabled" : "disabled") << "\n";
        s << "sim_duration: " << format_seconds(par.sim_duration) << "\n";
        s << "dt: " << format_seconds(par.dt) << "\n";
        s << "poll_interval: " << format_seconds(par.poll_interval) << "\n";
        s << "watch_latency: " << format_seconds(par.watch_latency) << "\n";
        s << "\nadmission:\n";
        if (out_.admission_lines.empty()) s << "  (no container requests)\n";
        for (const auto& line : out_.admission_lines) s << "  " << line << "\n";
        s << "\npipes:\n";
        if (out_.pipes.empty()) s << "  (none)\n";
        for (const PipeSummary& p : out_.pipes) {
            char buf[256];
            std::snprintf(buf, sizeof(buf),
                          "  %s container=%s block=%s delivered_bytes=%.0f mean_rate=%s "
                          "steady_rate=%s",
                          p.pipe.c_str(), p.container.c_str(), p.block.c_str(),
                          p.delivered_bytes, format_rate(p.mean_rate).c_str(),
                          format_rate(p.steady_rate).c_str());
            s << buf << "\n";
        }
        s << "\ntimeline:\n";
        if (!cfg_.shaping_enabled) {
            s << "  (shaping disabled)\n";
        } else {
            if (out_.timeline.empty() && out_.never_controlled.empty()) s << "  (none)\n";
            for (const TimelineRow& r : out_.timeline)
                s << "  " << r.pipe << " T=" << format_seconds(r.total)
                  << " (t1=" << format_seconds(r.t1) << " t2=" << format_seconds(r.t2)
                  << " t3=" << format_seconds(r.t3) << " t4=" << format_seconds(r.t4)
                  << " t5=" << format_seconds(r.t5) << ")\n";
            for (const std::string& pipe : out_.never_controlled)
                s << "  " << pipe << " never controlled\n";
        }
        s << "\ndiagnostics:\n";
        s << "  store_writes=" << out_.store_writes
          << " submit_failures=" << out_.submit_failures
          << " parse_failures=" << out_.parse_failures
          << " executor_skips=" << out_.executor_skips << "\n";
        return s.str();
    }

    const ScenarioConfig& cfg_;
    std::string name_;
    EventEngine engine_;
    CoordStore store_;
    std::unique_ptr<Cluster> cluster_;
    ResourceManager rm_;
    std::vector<std::unique_ptr<DataNodeAgent>> dn_agents_;
    std::vector<std::unique_ptr<NodeManagerAgent>> nm_agents_;
    std::map<std::string, ContainerRun> containers_;
    std::map<std::string, SimTime> container_starts_;
    std::map<std::string, PipeTrace> traces_;
    std::map<std::string, SimTime> close_times_;
    RunOutput out_;
};

std::string throughput_csv(const std::vector<SampleRow>& rows) {
    std::string out = "time,pipe,rate\n";
    for (const SampleRow& r : rows) {
        out += format_seconds(r.time);
        out += ',';
        out += r.pipe;
        out += ',';
        out += format_rate(r.rate_bps);
        out += '\n';
    }
    return out;
}

std::string timeline_csv(const std::vector<TimelineRow>& rows) {
    std::string out = "pipe,t1,t2,t3,t4,t5,T\n";
    for (const TimelineRow& r : rows) {
        out += r.pipe;
        for (SimTime v : {r.t1, r.t2, r.t3, r.t4, r.t5, r.total}) {
            out += ',';
            out += format_seconds(v);
        }
        out += '\n';
    }
    return out;
}

std::string run_meta_json(const ScenarioConfig& cfg, const RunOutput& out) {
    nlohmann::json meta;
    meta["shaping_enabled"] = cfg.shaping_enabled;
    meta["dt_us"] = cfg.parameters.dt;
    meta["poll_interval_us"] = cfg.parameters.poll_interval;
    meta["watch_latency_us"] = cfg.parameters.watch_latency;
    nlohmann::json pipes = nlohmann::json::array();
    // Class rates keyed by pipe for the comparison report.
    std::map<std::string, const PipeSummary*> sorted;
    for (const PipeSummary& p : out.pipes) sorted[p.pipe] = &p;
    for (const auto& [pipe, p] : sorted)
        pipes.push_back({{"pipe", pipe}, {"container", p->container}});
    meta["pipes"] = pipes;
    return meta.dump(2) + "\n";
}

bool write_file(const std::filesystem::path& path, const std::string& content,
                std::string& error) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        error = "cannot open '" + path.string() + "' for writing";
        return false;
    }
    f << content;
    f.flush();
    if (!f) {
        error = "write failed for '" + path.string() + "'";
        return false;
    }
    return true;
}

bool read_file(const std::filesystem::path& path, std::string& content, std::string& error) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        error = "cannot open '" + path.string() + "'";
        return false;
    }
    std::ostringstream buf;
    buf << f.rdbuf();
    content = buf.str();
    return true;
}

}  // namespace

double steady_state_mean(const std::vector<SampleRow>& series, SimTime dt) {
    if (series.empty()) return 0;
    const SimTime open_time = series.front().time - dt;
    const SimTime end_time = series.back().time;
    const SimTime cutoff = end_time - (end_time - open_time) / 4;
    double sum = 0;
    std::int64_t n = 0;
    for (const SampleRow& s : series) {
        if (s.time <= cutoff) continue;
        sum += s.rate_bps;
        ++n;
    }
    return n == 0 ? 0 : sum / static_cast<double>(n);
}

Result<SimTime, std::string> parse_seconds_field(const std::string& text) {
    const std::size_t dot = text.find('.');
    if (dot == std::string::npos || text.size() - dot - 1 != 6)
        return std::string("expected 6 fractional digits: ") + text;
    const bool negative = !text.empty() && text[0] == '-';
    const std::string whole = text.substr(negative ? 1 : 0, dot - (negative ? 1 : 0));
    const std::string frac = text.substr(dot + 1);
    if (whole.empty()) return std::string("bad seconds field: ") + text;
    SimTime sec = 0, micros = 0;
    for (char c : whole) {
        if (c < '0' || c > '9') return std::string("bad seconds field: ") + text;
        sec = sec * 10 + (c - '0');
    }
    for (char c : frac) {
        if (c < '0' || c > '9') return std::string("bad seconds field: ") + text;
        micros = micros * 10 + (c - '0');
    }
    SimTime v = sec * kMicrosPerSecond + micros;
    return negative ? -v : v;
}

Result<std::vector<SampleRow>, std::string> parse_throughput_csv(const std::string& text) {
    std::vector<SampleRow> rows;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "time,pipe,rate")
        return std::string("bad throughput.csv header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = line.rfind(',');
        if (c1 == std::string::npos || c2 == c1)
            return std::string("bad throughput row: ") + line;
        auto t = parse_seconds_field(line.substr(0, c1));
        if (!t.ok()) return t.error();
        SampleRow row;
        row.time = t.value();
        row.pipe = line.substr(c1 + 1, c2 - c1 - 1);
        row.rate_bps = std::stod(line.substr(c2 + 1));
        rows.push_back(std::move(row));
    }
    return rows;
}

Result<std::vector<TimelineRow>, std::string> parse_timeline_csv(const std::string& text) {
    std::vector<TimelineRow> rows;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "pipe,t1,t2,t3,t4,t5,T")
        return std::string("bad timeline.csv header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t c = line.find(',', start);
            if (c == std::string::npos) c = line.size();
            fields.push_back(line.substr(start, c - start));
            start = c + 1;
        }
        if (fields.size() != 7) return std::string("bad timeline row: ") + line;
        TimelineRow row;
        row.pipe = fields[0];
        SimTime* slots[6] = {&row.t1, &row.t2, &row.t3, &row.t4, &row.t5, &row.total};
        for (int i = 0; i < 6; ++i) {
            auto v = parse_seconds_field(fields[i + 1]);
            if (!v.ok()) return v.error();
            *slots[i] = v.value();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Result<RunOutput, RunError> run_scenario_config(const ScenarioConfig& config,
                                                const std::string& scenario_name,
                                                const std::string& out_dir) {
    if (auto v = validate_scenario(config); !v.ok())
        return RunError{kExitValidation, v.error()};

    SimulationRun run(config, scenario_name);
    auto result = run.execute();
    if (!result.ok()) return result.error();
    RunOutput out = std::move(result.value());

    if (!out_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec) return RunError{kExitIo, "cannot create output directory '" + out_dir + "'"};
        const std::filesystem::path dir(out_dir);
        std::string err;
        if (!write_file(dir / "throughput.csv", throughput_csv(out.samples), err) ||
            !write_file(dir / "timeline.csv", timeline_csv(out.timeline), err) ||
            !write_file(dir / "summary.txt", out.summary_text, err) ||
            !write_file(dir / "scenario_normalized.json", normalized_scenario_json(config),
                        err) ||
            !write_file(dir / "run_meta.json", run_meta_json(config, out), err))
            return RunError{kExitIo, err};
    }
    return out;
}

Result<RunOutput, RunError> run_scenario_file(
    const std::string& scenario_path, const std::string& out_dir,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
    auto loaded = load_scenario_file(scenario_path);
    if (!loaded.ok()) return RunError{kExitValidation, loaded.error()};
    ScenarioConfig cfg = std::move(loaded.value());
    for (const auto& [key, value] : overrides) {
        if (auto r = apply_override(cfg, key, value); !r.ok())
            return RunError{kExitValidation, r.error()};
    }
    if (auto v = validate_scenario(cfg); !v.ok()) return RunError{kExitValidation, v.error()};

    std::string name = std::filesystem::path(scenario_path).stem().string();
    return run_scenario_config(cfg, name, out_dir);
}

Result<ComparisonReport, CompareError> compare_runs(const std::string& baseline_dir,
                                                    const std::string& shaped_dir,
                                                    const std::string& out_file) {
    namespace fs = std::filesystem;
    std::string base_norm, shaped_norm, io_error;
    if (!read_file(fs::path(baseline_dir) / "scenario_normalized.json", base_norm, io_error))
        return CompareError{kExitIo, io_error};
    if (!read_file(fs::path(shaped_dir) / "scenario_normalized.json", shaped_norm, io_error))
        return CompareError{kExitIo, io_error};
    if (base_norm != shaped_norm)
        return CompareError{kExitMismatch, "scenarios differ beyond shaping_enabled"};

    nlohmann::json base_meta, shaped_meta;
    SimTime base_dt = 0, shaped_dt = 0;
    std::map<std::string, std::string> shaped_pipe_container;
    {
        std::string bm, sm;
        if (!read_file(fs::path(baseline_dir) / "run_meta.json", bm, io_error))
            return CompareError{kExitIo, io_error};
        if (!read_file(fs::path(shaped_dir) / "run_meta.json", sm, io_error))
            return CompareError{kExitIo, io_error};
        try {
            base_meta = nlohmann::json::parse(bm);
            shaped_meta = nlohmann::json::parse(sm);
        } catch (const nlohmann::json::parse_error& e) {
            return CompareError{kExitIo, std::string("bad run_meta.json: ") + e.what()};
        }
        if (base_meta.value("shaping_enabled", false))
            return CompareError{kExitMismatch, "baseline run had shaping enabled"};
        if (!shaped_meta.value("shaping_enabled", false))
            return CompareError{kExitMismatch, "shaped run had shaping disabled"};
        base_dt = base_meta.value("dt_us", 0);
        shaped_dt = shaped_meta.value("dt_us", 0);
        for (const auto& p : shaped_meta.value("pipes", nlohmann::json::array()))
            shaped_pipe_container[p.value("pipe", "")] = p.value("container", "");
    }

    auto load_stats = [](const std::string& dir, SimTime dt,
                         std::vector<ComparedPipe>& out) -> std::optional<CompareError> {
        std::string csv, err;
        if (!read_file(fs::path(dir) / "throughput.csv", csv, err))
            return CompareError{kExitIo, err};
        auto rows = parse_throughput_csv(csv);
        if (!rows.ok()) return CompareError{kExitIo, rows.error()};
        std::map<std::string, std::vector<SampleRow>> by_pipe;
        for (const SampleRow& r : rows.value()) by_pipe[r.pipe].push_back(r);
        for (const auto& [pipe, series] : by_pipe) {
            ComparedPipe cp;
            cp.pipe = pipe;
            cp.steady_rate = steady_state_mean(series, dt);
            cp.first_sample = series.front().time;
            cp.last_sample = series.back().time;
            out.push_back(std::move(cp));
        }
        return std::nullopt;
    };

    ComparisonReport report;
    if (auto err = load_stats(baseline_dir, base_dt, report.baseline)) return *err;
    if (auto err = load_stats(shaped_dir, shaped_dt, report.shaped)) return *err;
    if (report.baseline.empty() || report.shaped.empty())
        return CompareError{kExitMismatch, "a run produced no throughput samples"};

    // Seniority: earliest-opened pipe against the latest-opened one.
    const ComparedPipe* senior = &report.baseline.front();
    const ComparedPipe* junior = &report.baseline.front();
    for (const ComparedPipe& p : report.baseline) {
        if (p.first_sample < senior->first_sample) senior = &p;
        if (p.first_sample > junior->first_sample) junior = &p;
    }
    report.seniority_ratio =
        junior->steady_rate > 0 ? senior->steady_rate / junior->steady_rate : 0;

    // Shaped deviation against the container's class rate.
    nlohmann::json scenario;
    try {
        scenario = nlohmann::json::parse(base_norm);
    } catch (...) {
        return CompareError{kExitIo, "bad scenario_normalized.json"};
    }
    std::map<std::string, std::int64_t> class_rate;
    for (const auto& c : scenario.value("container_classes", nlohmann::json::array()))
        class_rate[c.value("class_name", "")] = c.value("io_rate", std::int64_t{0});
    std::map<std::string, std::string> container_class;
    for (const auto& r : scenario.value("container_requests", nlohmann::json::array()))
        container_class[r.value("container_id", "")] = r.value("class_name", "");

    for (ComparedPipe& p : report.shaped) {
        auto cit = shaped_pipe_container.find(p.pipe);
        if (cit != shaped_pipe_container.end()) {
            p.container = cit->second;
            auto cls = container_class.find(cit->second);
            if (cls != container_class.end()) p.class_rate = class_rate[cls->second];
        }
        if (p.class_rate > 0) {
            p.deviation = std::abs(p.steady_rate - static_cast<double>(p.class_rate)) /
                          static_cast<double>(p.class_rate);
            p.pass = p.deviation <= 0.05;
        }
    }

    std::ostringstream s;
    s << "comparison report\n\nbaseline (shaping disabled):\n";
    for (const ComparedPipe& p : report.baseline) {
        s << "  " << p.pipe << " steady_rate=" << format_rate(p.steady_rate) << "\n";
    }
    {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6f", report.seniority_ratio);
        s << "  seniority_ratio=" << buf << "\n";
    }
    s << "\nshaped (shaping enabled):\n";
    for (const ComparedPipe& p : report.shaped) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6f", p.deviation);
        s << "  " << p.pipe << " steady_rate=" << format_rate(p.steady_rate)
          << " class_rate=" << p.class_rate << " deviation=" << buf << " "
          << (p.class_rate > 0 ? (p.pass ? "PASS" : "FAIL") : "(no class rate)") << "\n";
    }
    report.text = s.str();

    if (!out_file.empty()) {
        std::string err;
        if (!write_file(out_file, report.text, err)) return CompareError{kExitIo, err};
    }
    return report;
}

}  // namespace piperate
