#include "srm/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "srm/errors.hpp"

namespace srm {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& where)
{
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) { ok = true; break; }
        if (!ok) throw ConfigError(where + ": unknown field '" + it.key() + "'");
    }
}

TsfKind parse_kind(const std::string& s, const std::string& where)
{
    if (s == "sine") return TsfKind::sine;
    if (s == "cubic") return TsfKind::cubic;
    if (s == "linear") return TsfKind::linear;
    throw ConfigError(where + ": unknown tsf kind '" + s + "'");
}

std::vector<double> number_list(const json& j, const std::string& where)
{
    if (!j.is_array() || j.empty())
        throw ConfigError(where + ": expected a non-empty array of numbers");
    std::vector<double> out;
    for (const json& v : j) {
        if (!v.is_number()) throw ConfigError(where + ": expected a number");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::string& origin)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError(origin + ": expected a JSON object");
    reject_unknown(doc,
                   {"motor_model", "synthesis", "gp", "simulation", "baseline",
                    "beta_sweep", "simulate", "ripple", "output_dir"},
                   origin);

    ExperimentConfig c;
    if (!doc.contains("motor_model") || !doc["motor_model"].is_string())
        throw ConfigError(origin + ": missing string field 'motor_model'");
    c.motor_model_path = doc["motor_model"].get<std::string>();

    if (doc.contains("synthesis")) {
        const json& s = doc["synthesis"];
        reject_unknown(s, {"n_points", "subsamples", "beta", "sample_period"},
                       origin + " synthesis");
        if (s.contains("n_points")) c.n_points = s["n_points"].get<int>();
        if (s.contains("subsamples")) c.subsamples = s["subsamples"].get<int>();
        if (s.contains("beta")) c.beta = s["beta"].get<double>();
        if (s.contains("sample_period")) c.sample_period = s["sample_period"].get<double>();
    }
    if (c.n_points < 2) throw ConfigError(origin + ": synthesis.n_points must be >= 2");
    if (c.subsamples < 1)
        throw ConfigError(origin + ": synthesis.subsamples must be >= 1");
    if (c.beta < 0) throw ConfigError(origin + ": synthesis.beta must be >= 0");
    if (!(c.sample_period > 0))
        throw ConfigError(origin + ": synthesis.sample_period must be > 0");

    if (doc.contains("gp")) {
        const json& g = doc["gp"];
        reject_unknown(g, {"mu", "ell_factors", "sf2_factors", "sn2_factors"},
                       origin + " gp");
        if (g.contains("mu")) c.gp.mu = g["mu"].get<int>();
        if (g.contains("ell_factors"))
            c.gp.ell_factors = number_list(g["ell_factors"], origin + " gp.ell_factors");
        if (g.contains("sf2_factors"))
            c.gp.sf2_factors = number_list(g["sf2_factors"], origin + " gp.sf2_factors");
        if (g.contains("sn2_factors"))
            c.gp.sn2_factors = number_list(g["sn2_factors"], origin + " gp.sn2_factors");
    }
    if (c.gp.mu < 0) throw ConfigError(origin + ": gp.mu must be >= 0");

    if (doc.contains("simulation")) {
        const json& s = doc["simulation"];
        reject_unknown(s, {"velocities_teeth_per_s", "m_sim"}, origin + " simulation");
        if (s.contains("velocities_teeth_per_s"))
            c.velocities_teeth = number_list(s["velocities_teeth_per_s"],
                                             origin + " velocities");
        if (s.contains("m_sim")) c.m_sim = s["m_sim"].get<int>();
    }
    for (double v : c.velocities_teeth)
        if (!(v > 0))
            throw ConfigError(origin + ": simulation velocities must be positive");
    if (c.m_sim < 1) throw ConfigError(origin + ": simulation.m_sim must be >= 1");

    if (doc.contains("baseline")) {
        const json& b = doc["baseline"];
        reject_unknown(b, {"kind", "overlap_electrical", "saturation"},
                       origin + " baseline");
        if (b.contains("kind"))
            c.baseline_kind = parse_kind(b["kind"].get<std::string>(), origin);
        if (b.contains("overlap_electrical"))
            c.baseline_overlap = b["overlap_electrical"].get<double>();
        if (b.contains("saturation"))
            c.baseline_saturation = b["saturation"].get<double>();
    }
    if (!(c.baseline_overlap > 0 && c.baseline_overlap < kTwoPi / 3.0))
        throw ConfigError(origin + ": baseline.overlap_electrical out of (0, 2*pi/3)");
    if (!(c.baseline_saturation > 0))
        throw ConfigError(origin + ": baseline.saturation must be > 0");

    if (doc.contains("beta_sweep")) {
        const json& b = doc["beta_sweep"];
        reject_unknown(b, {"betas", "velocity_teeth_per_s"}, origin + " beta_sweep");
        if (b.contains("betas"))
            c.sweep_betas = number_list(b["betas"], origin + " beta_sweep.betas");
        if (b.contains("velocity_teeth_per_s"))
            c.sweep_velocity_teeth = b["velocity_teeth_per_s"].get<double>();
    }
    for (double b : c.sweep_betas)
        if (b < 0) throw ConfigError(origin + ": beta_sweep.betas must be >= 0");
    if (!(c.sweep_velocity_teeth > 0))
        throw ConfigError(origin + ": beta_sweep.velocity_teeth_per_s must be > 0");

    if (doc.contains("simulate")) {
        const json& s = doc["simulate"];
        reject_unknown(s, {"method", "velocity_teeth_per_s"}, origin + " simulate");
        if (s.contains("method")) c.simulate_method = s["method"].get<std::string>();
        if (s.contains("velocity_teeth_per_s"))
            c.simulate_velocity_teeth = s["velocity_teeth_per_s"].get<double>();
    }
    if (c.simulate_method != "optimal" && c.simulate_method != "table" &&
        c.simulate_method != "sine" && c.simulate_method != "cubic" &&
        c.simulate_method != "linear")
        throw ConfigError(origin + ": simulate.method must be one of "
                                   "optimal|table|sine|cubic|linear");
    if (!(c.simulate_velocity_teeth > 0))
        throw ConfigError(origin + ": simulate.velocity_teeth_per_s must be > 0");

    if (doc.contains("ripple")) {
        const json& rj = doc["ripple"];
        reject_unknown(rj, {"velocity_teeth_per_s", "torque_request"}, origin + " ripple");
        if (rj.contains("velocity_teeth_per_s"))
            c.ripple_velocity_teeth = rj["velocity_teeth_per_s"].get<double>();
        if (rj.contains("torque_request"))
            c.ripple_torque_request = rj["torque_request"].get<double>();
    }
    if (c.ripple_velocity_teeth < 0)
        throw ConfigError(origin + ": ripple.velocity_teeth_per_s must be >= 0");

    if (doc.contains("output_dir")) c.output_dir = doc["output_dir"].get<std::string>();
    return c;
}

ExperimentConfig load_experiment_config(const std::string& path)
{
    ExperimentConfig c = parse_experiment_config(read_file(path), path);
    if (!fs::exists(c.motor_model_path)) {
        // also try resolving relative to the config file's directory
        const fs::path alt = fs::path(path).parent_path() / c.motor_model_path;
        if (fs::exists(alt))
            c.motor_model_path = alt.string();
        else
            throw ConfigError(path + ": motor model config not found: " +
                              c.motor_model_path);
    }
    return c;
}

ConventionalTsf make_baseline(const ExperimentConfig& config,
                              const TorqueGainModel& model, TsfKind kind)
{
    return ConventionalTsf(model, kind, config.baseline_overlap,
                           config.baseline_saturation);
}

namespace {

TableMetadata metadata_of(const ExperimentConfig& c, const TorqueGainModel& model,
                          const RippleProblem& p, const RippleSolution& s)
{
    TableMetadata m;
    m.n_teeth = model.geometry().n_teeth;
    m.n_points = c.n_points;
    m.subsamples = c.subsamples;
    m.beta = c.beta;
    m.sample_period = c.sample_period;
    m.target = p.target;
    m.velocity = p.velocity;
    m.eq_residual = s.eq_residual;
    m.pg_norm = s.pg_norm;
    m.ripple_norm = s.ripple_norm;
    m.power_l1 = s.power_l1;
    m.iterations = s.iterations;
    return m;
}

std::string synth_report(const SynthOutput& out, const ExperimentConfig& c)
{
    std::ostringstream os;
    os << "srm synthesis report\n";
    os << "n_points " << c.n_points << "\nsubsamples " << c.subsamples << "\nbeta "
       << format_double(c.beta) << "\nsample_period " << format_double(c.sample_period)
       << "\n";
    for (int sgn = 0; sgn < 2; ++sgn) {
        const RippleSolution& s = sgn == 0 ? out.solution_pos : out.solution_neg;
        const auto& diag = sgn == 0 ? out.gp_diag_pos : out.gp_diag_neg;
        const char* tag = sgn == 0 ? "positive" : "negative";
        os << "\n[table " << tag << "]\n";
        os << "objective " << format_double(s.objective) << "\n";
        os << "power_l1 " << format_double(s.power_l1) << "\n";
        os << "ripple_norm " << format_double(s.ripple_norm) << "\n";
        os << "eq_residual " << format_double(s.eq_residual) << "\n";
        os << "pg_norm " << format_double(s.pg_norm) << "\n";
        os << "iterations " << s.iterations << "\n";
        for (int cl = 0; cl < 3; ++cl) {
            const GpCommutation& gp = *out.gp;
            const GpCoil& coil = gp.coil(cl, sgn == 0 ? 1.0 : -1.0);
            os << "[gp " << tag << " coil " << cl + 1 << "]\n";
            os << "length_scale " << format_double(coil.spec.length_scale) << "\n";
            os << "signal_var " << format_double(coil.spec.signal_var) << "\n";
            os << "sigma_n2 " << format_double(coil.sigma_n2) << "\n";
            os << "log_marginal " << format_double(diag[cl].log_marginal) << "\n";
            os << "max_interp_error " << format_double(diag[cl].max_interp_error)
               << "\n";
            os << "max_clamp " << format_double(diag[cl].max_clamp) << "\n";
            os << "clamp_flagged " << (diag[cl].clamp_flagged ? 1 : 0) << "\n";
            os << "jitter " << format_double(diag[cl].jitter) << "\n";
        }
    }
    return os.str();
}

}  // namespace

SynthOutput run_synth(const ExperimentConfig& config, const TorqueGainModel& model,
                      const std::string& out_dir)
{
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);

    RippleProblem prob_pos = assemble(model, config.n_points, config.subsamples,
                                      config.beta, config.sample_period, 1.0);
    RippleProblem prob_neg = assemble(model, config.n_points, config.subsamples,
                                      config.beta, config.sample_period, -1.0);

    SynthOutput out;
    out.solution_pos = solve(prob_pos);
    out.solution_neg = solve(prob_neg);
    out.table_pos = CommutationTable(prob_pos.grid_theta_e, out.solution_pos.table, 1.0);
    out.table_neg = CommutationTable(prob_neg.grid_theta_e, out.solution_neg.table, -1.0);

    auto pos_coils = fit_table_gps(out.table_pos, config.gp, &out.gp_diag_pos);
    auto neg_coils = fit_table_gps(out.table_neg, config.gp, &out.gp_diag_neg);
    out.gp = std::make_shared<GpCommutation>(model.geometry(), prob_pos.grid_theta_e,
                                             std::move(pos_coils), std::move(neg_coils));

    save_table_csv((fs::path(out_dir) / "table.csv").string(), out.table_pos,
                   metadata_of(config, model, prob_pos, out.solution_pos));
    save_table_csv((fs::path(out_dir) / "table_neg.csv").string(), out.table_neg,
                   metadata_of(config, model, prob_neg, out.solution_neg));
    save_gp_model((fs::path(out_dir) / "gp_model.txt").string(), *out.gp);
    write_file_atomic((fs::path(out_dir) / "report.txt").string(),
                      synth_report(out, config));

    const auto t1 = std::chrono::steady_clock::now();
    out.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    return out;
}

SynthOutput load_or_synth(const ExperimentConfig& config, const TorqueGainModel& model,
                          const std::string& out_dir)
{
    const fs::path dir(out_dir);
    const fs::path table_path = dir / "table.csv";
    const fs::path table_neg_path = dir / "table_neg.csv";
    const fs::path gp_path = dir / "gp_model.txt";
    if (fs::exists(table_path) && fs::exists(table_neg_path) && fs::exists(gp_path)) {
        SynthOutput out;
        auto [tp, mp] = load_table_csv(table_path.string());
        auto [tn, mn] = load_table_csv(table_neg_path.string());
        out.table_pos = std::move(tp);
        out.table_neg = std::move(tn);
        out.solution_pos.eq_residual = mp.eq_residual;
        out.solution_pos.ripple_norm = mp.ripple_norm;
        out.solution_pos.power_l1 = mp.power_l1;
        out.solution_neg.eq_residual = mn.eq_residual;
        out.solution_neg.ripple_norm = mn.ripple_norm;
        out.solution_neg.power_l1 = mn.power_l1;
        out.gp = std::make_shared<GpCommutation>(load_gp_model(gp_path.string()));
        return out;
    }
    return run_synth(config, model, out_dir);
}

namespace {

struct SweepCell {
    double velocity_teeth;
    std::string method;
    bool ok = false;
    std::string error;
    double rms = 0;
    double energy = 0;
};

const CommutationFunction* pick_method(const std::string& name,
                                       const ConventionalTsf& sine,
                                       const ConventionalTsf& cubic,
                                       const ConventionalTsf& linear,
                                       const GpCommutation& gp)
{
    if (name == "sine") return &sine;
    if (name == "cubic") return &cubic;
    if (name == "linear") return &linear;
    return &gp;
}

}  // namespace

void run_sweep_velocity(const ExperimentConfig& config, const TorqueGainModel& model,
                        const std::string& out_dir)
{
    SynthOutput synth = load_or_synth(config, model, out_dir);
    ConventionalTsf sine = make_baseline(config, model, TsfKind::sine);
    ConventionalTsf cubic = make_baseline(config, model, TsfKind::cubic);
    ConventionalTsf linear = make_baseline(config, model, TsfKind::linear);

    const std::vector<std::string> methods{"sine", "cubic", "linear", "optimal"};
    std::vector<SweepCell> cells;
    for (double v : config.velocities_teeth)
        for (const std::string& m : methods) {
            SweepCell cell;
            cell.velocity_teeth = v;
            cell.method = m;
            cells.push_back(std::move(cell));
        }

    const double p = model.geometry().spatial_period();
    const auto n_cells = static_cast<Eigen::Index>(cells.size());
#pragma omp parallel for schedule(dynamic) if (default_exec() == Exec::parallel)
    for (Eigen::Index i = 0; i < n_cells; ++i) {
        SweepCell& cell = cells[i];
        try {
            ReferenceProfile prof(cell.velocity_teeth * p, model.geometry());
            const CommutationFunction* f =
                pick_method(cell.method, sine, cubic, linear, *synth.gp);
            SimResult res =
                run_closed_loop(model, *f, DiscreteController{}, prof, config.m_sim);
            SimMetrics met = metrics(res);
            cell.rms = met.rms_error_last_tooth;
            cell.energy = met.energy;
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
        }
    }

    // rows are generated in (velocity, method) order already; keep it stable
    std::ostringstream os;
    os << "v_teeth_per_s,commutation,status,rms_error,energy\n";
    for (const SweepCell& cell : cells) {
        os << format_double(cell.velocity_teeth) << ',' << cell.method << ',';
        if (cell.ok)
            os << "ok," << format_double(cell.rms) << ',' << format_double(cell.energy);
        else {
            std::string msg = cell.error;
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            os << "error: " << msg << ",,";
        }
        os << '\n';
    }
    write_file_atomic((fs::path(out_dir) / "sweep_velocity.csv").string(), os.str());
}

void run_sweep_beta(const ExperimentConfig& config, const TorqueGainModel& model,
                    const std::string& out_dir)
{
    fs::create_directories(out_dir);
    ConventionalTsf sine = make_baseline(config, model, TsfKind::sine);
    const double p = model.geometry().spatial_period();
    ReferenceProfile prof(config.sweep_velocity_teeth * p, model.geometry());

    SimResult res_sine =
        run_closed_loop(model, sine, DiscreteController{}, prof, config.m_sim);
    SimMetrics met_sine = metrics(res_sine);

    std::vector<double> betas = config.sweep_betas;
    std::sort(betas.begin(), betas.end());

    std::ostringstream os;
    os << "beta,status,rms_ratio_sine_over_opt,energy_ratio_opt_over_sine,"
          "ripple_norm,power_norm\n";
    for (double beta : betas) {
        os << format_double(beta) << ',';
        try {
            ExperimentConfig cb = config;
            cb.beta = beta;
            RippleProblem prob_pos =
                assemble(model, cb.n_points, cb.subsamples, beta, cb.sample_period, 1.0);
            RippleProblem prob_neg =
                assemble(model, cb.n_points, cb.subsamples, beta, cb.sample_period, -1.0);
            RippleSolution sol_pos = solve(prob_pos);
            RippleSolution sol_neg = solve(prob_neg);
            CommutationTable tab_pos(prob_pos.grid_theta_e, sol_pos.table, 1.0);
            CommutationTable tab_neg(prob_neg.grid_theta_e, sol_neg.table, -1.0);
            auto pos_coils = fit_table_gps(tab_pos, cb.gp, nullptr);
            auto neg_coils = fit_table_gps(tab_neg, cb.gp, nullptr);
            GpCommutation gp(model.geometry(), prob_pos.grid_theta_e,
                             std::move(pos_coils), std::move(neg_coils));
            SimResult res =
                run_closed_loop(model, gp, DiscreteController{}, prof, config.m_sim);
            SimMetrics met = metrics(res);
            os << "ok," << format_double(met_sine.rms_error_last_tooth /
                                         met.rms_error_last_tooth)
               << ',' << format_double(met.energy / met_sine.energy) << ','
               << format_double(sol_pos.ripple_norm) << ','
               << format_double(sol_pos.power_l1);
        } catch (const std::exception& e) {
            std::string msg = e.what();
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            os << "error: " << msg << ",,,,";
        }
        os << '\n';
    }
    write_file_atomic((fs::path(out_dir) / "sweep_beta.csv").string(), os.str());
}

void run_ripple(const ExperimentConfig& config, const TorqueGainModel& model,
                const std::string& out_dir)
{
    SynthOutput synth = load_or_synth(config, model, out_dir);
    ConventionalTsf sine = make_baseline(config, model, config.baseline_kind);
    TableCommutation table(model.geometry(), synth.table_pos, synth.table_neg);

    const double v_nominal = nominal_velocity(model.geometry().n_teeth, config.n_points,
                                              config.sample_period);
    const double p = model.geometry().spatial_period();
    const double v = config.ripple_velocity_teeth > 0.0
                         ? config.ripple_velocity_teeth * p
                         : v_nominal;
    const double t_req = config.ripple_torque_request;

    std::vector<double> rip_sine = open_loop_ripple(model, sine, v, config.sample_period,
                                                    config.n_points, config.subsamples);
    std::vector<double> rip_opt = open_loop_ripple(model, table, v, config.sample_period,
                                                   config.n_points, config.subsamples);

    std::ostringstream os;
    os << "index,t,erel_sine,erel_optimal,eabs_sine,eabs_optimal\n";
    for (size_t i = 0; i < rip_sine.size(); ++i) {
        const int k = static_cast<int>(i) / config.subsamples;
        const int j = static_cast<int>(i) % config.subsamples;
        const double t = (k + j / (double)config.subsamples) * config.sample_period;
        os << i << ',' << format_double(t) << ',' << format_double(rip_sine[i]) << ','
           << format_double(rip_opt[i]) << ',' << format_double(rip_sine[i] * t_req)
           << ',' << format_double(rip_opt[i] * t_req) << '\n';
    }
    write_file_atomic((fs::path(out_dir) / "ripple.csv").string(), os.str());
}

void run_simulate(const ExperimentConfig& config, const TorqueGainModel& model,
                  const std::string& out_dir)
{
    SynthOutput synth = load_or_synth(config, model, out_dir);
    ConventionalTsf sine = make_baseline(config, model, TsfKind::sine);
    ConventionalTsf cubic = make_baseline(config, model, TsfKind::cubic);
    ConventionalTsf linear = make_baseline(config, model, TsfKind::linear);
    TableCommutation table(model.geometry(), synth.table_pos, synth.table_neg);

    const CommutationFunction* f = nullptr;
    if (config.simulate_method == "table")
        f = &table;
    else
        f = pick_method(config.simulate_method, sine, cubic, linear, *synth.gp);

    const double p = model.geometry().spatial_period();
    ReferenceProfile prof(config.simulate_velocity_teeth * p, model.geometry());
    SimResult res = run_closed_loop(model, *f, DiscreteController{}, prof, config.m_sim);
    SimMetrics met = metrics(res);

    const std::string stem = "sim_" + config.simulate_method;
    write_file_atomic((fs::path(out_dir) / (stem + ".csv")).string(),
                      format_sim_csv(res));
    write_file_atomic((fs::path(out_dir) / (stem + "_metrics.txt")).string(),
                      format_metrics(met));
}

}  // namespace srm
