#include "srm/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "srm/errors.hpp"

namespace srm {

using nlohmann::json;

std::string format_double(double value)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& content)
{
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open for writing: " + tmp);
        out << content;
        if (!out.good()) throw ConfigError("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ConfigError("rename failed: " + tmp + " -> " + path);
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

namespace {

void reject_unknown_fields(const json& obj, std::initializer_list<const char*> known,
                           const std::string& where)
{
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) { ok = true; break; }
        if (!ok)
            throw ConfigError(where + ": unknown field '" + it.key() + "'");
    }
}

}  // namespace

TorqueGainModel parse_motor_config(const std::string& text, const std::string& origin)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError(origin + ": expected a JSON object");
    reject_unknown_fields(doc, {"n_teeth", "coils"}, origin);
    if (!doc.contains("n_teeth") || !doc["n_teeth"].is_number_integer())
        throw ConfigError(origin + ": missing integer field 'n_teeth'");
    if (!doc.contains("coils") || !doc["coils"].is_array() || doc["coils"].size() != 3)
        throw ConfigError(origin + ": 'coils' must be an array of exactly 3 entries");

    std::array<std::vector<Harmonic>, 3> coils;
    for (int c = 0; c < 3; ++c) {
        const json& jc = doc["coils"][c];
        if (!jc.is_object())
            throw ConfigError(origin + ": coil entry must be an object");
        reject_unknown_fields(jc, {"harmonics"}, origin + " coil " + std::to_string(c + 1));
        if (!jc.contains("harmonics") || !jc["harmonics"].is_array())
            throw ConfigError(origin + ": coil " + std::to_string(c + 1) +
                              " needs a 'harmonics' array");
        for (const json& jh : jc["harmonics"]) {
            reject_unknown_fields(jh, {"order", "amplitude", "phase"},
                                  origin + " harmonic");
            if (!jh.contains("order") || !jh.contains("amplitude") ||
                !jh.contains("phase"))
                throw ConfigError(origin +
                                  ": harmonic needs 'order', 'amplitude', 'phase'");
            coils[c].push_back(Harmonic{jh["order"].get<int>(),
                                        jh["amplitude"].get<double>(),
                                        jh["phase"].get<double>()});
        }
    }
    return TorqueGainModel(MotorGeometry{doc["n_teeth"].get<int>()}, coils);
}

TorqueGainModel load_motor_config(const std::string& path)
{
    return parse_motor_config(read_file(path), path);
}

std::string format_table_csv(const CommutationTable& table, const TableMetadata& meta)
{
    std::ostringstream os;
    os << "# srm-table v1\n";
    os << "# n_teeth " << meta.n_teeth << "\n";
    os << "# n_points " << meta.n_points << "\n";
    os << "# subsamples " << meta.subsamples << "\n";
    os << "# beta " << format_double(meta.beta) << "\n";
    os << "# sample_period " << format_double(meta.sample_period) << "\n";
    os << "# target " << format_double(meta.target) << "\n";
    os << "# velocity " << format_double(meta.velocity) << "\n";
    os << "# eq_residual " << format_double(meta.eq_residual) << "\n";
    os << "# pg_norm " << format_double(meta.pg_norm) << "\n";
    os << "# ripple_norm " << format_double(meta.ripple_norm) << "\n";
    os << "# power_l1 " << format_double(meta.power_l1) << "\n";
    os << "# iterations " << meta.iterations << "\n";
    os << "theta_e,f1,f2,f3\n";
    for (size_t i = 0; i < table.theta_e.size(); ++i) {
        os << format_double(table.theta_e[i]);
        for (int c = 0; c < 3; ++c)
            os << ',' << format_double(table.values(static_cast<Eigen::Index>(i), c));
        os << '\n';
    }
    return os.str();
}

void save_table_csv(const std::string& path, const CommutationTable& table,
                    const TableMetadata& meta)
{
    write_file_atomic(path, format_table_csv(table, meta));
}

std::pair<CommutationTable, TableMetadata> load_table_csv(const std::string& path)
{
    std::istringstream in(read_file(path));
    std::string line;
    int line_no = 0;

    if (!std::getline(in, line) || line != "# srm-table v1") {
        if (line.rfind("# srm-table", 0) == 0)
            throw ConfigError(path + ":1: unsupported table version '" + line + "'");
        throw ConfigError(path + ":1: not an srm-table file");
    }
    line_no = 1;

    TableMetadata meta;
    std::vector<double> grid;
    std::vector<std::array<double, 3>> rows;
    bool header_seen = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key;
            ls >> key;
            if (key == "n_teeth") ls >> meta.n_teeth;
            else if (key == "n_points") ls >> meta.n_points;
            else if (key == "subsamples") ls >> meta.subsamples;
            else if (key == "beta") ls >> meta.beta;
            else if (key == "sample_period") ls >> meta.sample_period;
            else if (key == "target") ls >> meta.target;
            else if (key == "velocity") ls >> meta.velocity;
            else if (key == "eq_residual") ls >> meta.eq_residual;
            else if (key == "pg_norm") ls >> meta.pg_norm;
            else if (key == "ripple_norm") ls >> meta.ripple_norm;
            else if (key == "power_l1") ls >> meta.power_l1;
            else if (key == "iterations") ls >> meta.iterations;
            else
                throw ConfigError(path + ":" + std::to_string(line_no) +
                                  ": unknown metadata key '" + key + "'");
            if (ls.fail())
                throw ConfigError(path + ":" + std::to_string(line_no) +
                                  ": malformed metadata value");
            continue;
        }
        if (!header_seen) {
            if (line != "theta_e,f1,f2,f3")
                throw ConfigError(path + ":" + std::to_string(line_no) +
                                  ": expected column header 'theta_e,f1,f2,f3'");
            header_seen = true;
            continue;
        }
        std::array<double, 4> vals{};
        std::istringstream ls(line);
        std::string cell;
        for (int c = 0; c < 4; ++c) {
            if (!std::getline(ls, cell, ','))
                throw ConfigError(path + ":" + std::to_string(line_no) +
                                  ": expected 4 comma-separated values");
            try {
                vals[c] = std::stod(cell);
            } catch (const std::exception&) {
                throw ConfigError(path + ":" + std::to_string(line_no) +
                                  ": malformed number '" + cell + "'");
            }
        }
        grid.push_back(vals[0]);
        rows.push_back({vals[1], vals[2], vals[3]});
    }
    if (!header_seen)
        throw ConfigError(path + ": missing column header section");
    if (grid.empty()) throw ConfigError(path + ": no table rows");

    Eigen::MatrixX3d values(static_cast<Eigen::Index>(rows.size()), 3);
    for (size_t i = 0; i < rows.size(); ++i)
        for (int c = 0; c < 3; ++c)
            values(static_cast<Eigen::Index>(i), c) = rows[i][c];
    return {CommutationTable(std::move(grid), std::move(values), meta.target), meta};
}

namespace {

void format_gp_coil(std::ostringstream& os, const GpCoil& coil, const char* sign,
                    int index)
{
    os << "gp " << sign << ' ' << index << "\n";
    os << "mu " << coil.spec.mu << "\n";
    os << "length_scale " << format_double(coil.spec.length_scale) << "\n";
    os << "signal_var " << format_double(coil.spec.signal_var) << "\n";
    os << "sigma_n2 " << format_double(coil.sigma_n2) << "\n";
    os << "alpha\n";
    for (Eigen::Index i = 0; i < coil.alpha.size(); ++i)
        os << format_double(coil.alpha[i]) << "\n";
}

}  // namespace

std::string format_gp_model(const GpCommutation& gp)
{
    std::ostringstream os;
    os << "srm-gp-model v1\n";
    os << "n_teeth " << gp.geometry().n_teeth << "\n";
    os << "period " << format_double(gp.period()) << "\n";
    os << "n_train " << gp.train_theta_e().size() << "\n";
    os << "train_theta_e\n";
    for (double t : gp.train_theta_e()) os << format_double(t) << "\n";
    for (int c = 0; c < 3; ++c) format_gp_coil(os, gp.coil(c, 1.0), "positive", c + 1);
    for (int c = 0; c < 3; ++c) format_gp_coil(os, gp.coil(c, -1.0), "negative", c + 1);
    os << "end\n";
    return os.str();
}

void save_gp_model(const std::string& path, const GpCommutation& gp)
{
    write_file_atomic(path, format_gp_model(gp));
}

namespace {

struct LineReader {
    std::istringstream in;
    std::string origin;
    int line_no = 0;

    explicit LineReader(const std::string& text, std::string org)
        : in(text), origin(std::move(org))
    {
    }

    std::string next(const char* expected_section)
    {
        std::string line;
        if (!std::getline(in, line))
            throw ConfigError(origin + ": truncated file, missing section '" +
                              expected_section + "' after line " +
                              std::to_string(line_no));
        ++line_no;
        return line;
    }

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + msg);
    }

    double number(const char* section)
    {
        const std::string line = next(section);
        try {
            return std::stod(line);
        } catch (const std::exception&) {
            fail("malformed number '" + line + "' in section '" + section + "'");
        }
    }

    // "key value" line with a fixed expected key
    std::string keyed(const char* key)
    {
        const std::string line = next(key);
        const std::string prefix = std::string(key) + " ";
        if (line.rfind(prefix, 0) != 0)
            fail("expected '" + std::string(key) + " <value>', got '" + line + "'");
        return line.substr(prefix.size());
    }

    double keyed_number(const char* key)
    {
        const std::string v = keyed(key);
        try {
            return std::stod(v);
        } catch (const std::exception&) {
            fail("malformed value for '" + std::string(key) + "'");
        }
    }
};

GpCoil parse_gp_coil(LineReader& r, const char* sign, int index, Eigen::Index n_train)
{
    const std::string head = r.next("gp");
    std::ostringstream expect;
    expect << "gp " << sign << ' ' << index;
    if (head != expect.str())
        r.fail("expected section '" + expect.str() + "', got '" + head + "'");

    GpCoil coil;
    coil.spec.mu = static_cast<int>(r.keyed_number("mu"));
    coil.spec.length_scale = r.keyed_number("length_scale");
    coil.spec.signal_var = r.keyed_number("signal_var");
    coil.sigma_n2 = r.keyed_number("sigma_n2");
    const std::string alpha_head = r.next("alpha");
    if (alpha_head != "alpha") r.fail("expected section 'alpha'");
    coil.alpha.resize(n_train);
    for (Eigen::Index i = 0; i < n_train; ++i) coil.alpha[i] = r.number("alpha");
    return coil;
}

}  // namespace

GpCommutation parse_gp_model(const std::string& text, const std::string& origin)
{
    LineReader r(text, origin);
    const std::string version = r.next("version");
    if (version != "srm-gp-model v1") {
        if (version.rfind("srm-gp-model", 0) == 0)
            r.fail("unsupported gp model version '" + version + "'");
        r.fail("not an srm-gp-model file");
    }
    const int n_teeth = static_cast<int>(r.keyed_number("n_teeth"));
    (void)r.keyed_number("period");  // derivable from n_teeth; stored for readers
    const auto n_train = static_cast<Eigen::Index>(r.keyed_number("n_train"));
    if (n_train < 1) r.fail("n_train must be positive");

    const std::string grid_head = r.next("train_theta_e");
    if (grid_head != "train_theta_e") r.fail("expected section 'train_theta_e'");
    std::vector<double> train(n_train);
    for (Eigen::Index i = 0; i < n_train; ++i) train[i] = r.number("train_theta_e");

    std::array<GpCoil, 3> pos, neg;
    for (int c = 0; c < 3; ++c) pos[c] = parse_gp_coil(r, "positive", c + 1, n_train);
    for (int c = 0; c < 3; ++c) neg[c] = parse_gp_coil(r, "negative", c + 1, n_train);

    const std::string tail = r.next("end");
    if (tail != "end") r.fail("expected final 'end' marker");

    return GpCommutation(MotorGeometry{n_teeth}, std::move(train), std::move(pos),
                         std::move(neg));
}

GpCommutation load_gp_model(const std::string& path)
{
    return parse_gp_model(read_file(path), path);
}

std::string format_sim_csv(const SimResult& result)
{
    std::ostringstream os;
    os << "t,r,phi,e,Tstar,T,u1,u2,u3\n";
    for (size_t i = 0; i < result.time.size(); ++i) {
        os << format_double(result.time[i]) << ',' << format_double(result.reference[i])
           << ',' << format_double(result.position[i]) << ','
           << format_double(result.error[i]) << ','
           << format_double(result.torque_request[i]) << ','
           << format_double(result.torque[i]);
        for (int c = 0; c < 3; ++c) os << ',' << format_double(result.currents_sq[i][c]);
        os << '\n';
    }
    return os.str();
}

std::string format_metrics(const SimMetrics& m)
{
    std::ostringstream os;
    os << "rms_error_last_tooth " << format_double(m.rms_error_last_tooth) << "\n";
    os << "rms_abs_ripple " << format_double(m.rms_abs_ripple) << "\n";
    os << "rel_ripple_norm " << format_double(m.rel_ripple_norm) << "\n";
    os << "energy " << format_double(m.energy) << "\n";
    return os.str();
}

}  // namespace srm
