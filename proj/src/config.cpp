#include "eeqt/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "eeqt/errors.hpp"

namespace eeqt {

namespace {

using nlohmann::json;

const json& require_field(const json& obj, const std::string& path, const char* key) {
    if (!obj.is_object()) throw ConfigError(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(path + "." + key, "missing required field");
    return *it;
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    return v.get<double>();
}

std::uint64_t as_count(const json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw ConfigError(path, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

Complex parse_complex(const json& v, const std::string& path) {
    if (v.is_number()) return Complex(v.get<double>(), 0.0);
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return Complex(v[0].get<double>(), v[1].get<double>());
    throw ConfigError(path, "expected a number or an [re, im] pair");
}

ComplexMatrix parse_matrix(const json& v, int n, const std::string& path) {
    if (!v.is_array() || static_cast<int>(v.size()) != n)
        throw ConfigError(path, "expected a matrix with " + std::to_string(n) + " rows");
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) {
        const json& row = v[i];
        const std::string row_path = path + "[" + std::to_string(i) + "]";
        if (!row.is_array() || static_cast<int>(row.size()) != n)
            throw ConfigError(row_path, "expected a row of " + std::to_string(n) + " entries");
        for (int j = 0; j < n; ++j)
            m(i, j) = parse_complex(row[j], row_path + "[" + std::to_string(j) + "]");
    }
    return m;
}

MatrixSchedule parse_schedule(const json& v, int n, const std::string& path) {
    if (v.is_null()) return MatrixSchedule(ComplexMatrix::Zero(n, n));
    if (v.is_object()) {
        const json& breaks = require_field(v, path, "breakpoints");
        const json& values = require_field(v, path, "values");
        if (!breaks.is_array() || !values.is_array())
            throw ConfigError(path, "breakpoints and values must be arrays");
        std::vector<double> b;
        for (std::size_t i = 0; i < breaks.size(); ++i)
            b.push_back(as_number(breaks[i], path + ".breakpoints[" + std::to_string(i) + "]"));
        std::vector<ComplexMatrix> vals;
        for (std::size_t i = 0; i < values.size(); ++i)
            vals.push_back(parse_matrix(values[i], n, path + ".values[" + std::to_string(i) + "]"));
        try {
            return MatrixSchedule(std::move(b), std::move(vals));
        } catch (const Error& e) {
            throw ConfigError(path, e.what());
        }
    }
    return MatrixSchedule(parse_matrix(v, n, path));
}

std::map<std::string, double> parse_params(const json& model, const std::string& path) {
    std::map<std::string, double> params;
    if (model.contains("params")) {
        const json& p = model["params"];
        if (!p.is_object()) throw ConfigError(path + ".params", "expected an object");
        for (auto it = p.begin(); it != p.end(); ++it)
            params[it.key()] = as_number(it.value(), path + ".params." + it.key());
    }
    return params;
}

HybridModel parse_model(const json& model, const std::string& path) {
    if (!model.is_object()) throw ConfigError(path, "expected an object");

    if (model.contains("builtin")) {
        const json& name = model["builtin"];
        if (!name.is_string()) throw ConfigError(path + ".builtin", "expected a string");
        try {
            return builtin_model(name.get<std::string>(), parse_params(model, path));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(path + ".builtin", e.what());
        }
    }

    const int n = static_cast<int>(as_count(require_field(model, path, "n"), path + ".n"));
    const int m = static_cast<int>(as_count(require_field(model, path, "m"), path + ".m"));
    if (n < 1) throw ConfigError(path + ".n", "quantum dimension must be >= 1");
    if (m < 1) throw ConfigError(path + ".m", "sector count must be >= 1");

    const json& hams = require_field(model, path, "hamiltonians");
    if (!hams.is_array() || static_cast<int>(hams.size()) != m)
        throw ConfigError(path + ".hamiltonians", "expected " + std::to_string(m) + " entries");
    std::vector<MatrixSchedule> h;
    for (int a = 0; a < m; ++a)
        h.push_back(parse_schedule(hams[a], n, path + ".hamiltonians[" + std::to_string(a) + "]"));

    const json& coup = require_field(model, path, "couplings");
    if (!coup.is_array() || static_cast<int>(coup.size()) != m)
        throw ConfigError(path + ".couplings", "expected " + std::to_string(m) + " rows");
    std::vector<std::vector<MatrixSchedule>> g;
    for (int a = 0; a < m; ++a) {
        const json& row = coup[a];
        const std::string row_path = path + ".couplings[" + std::to_string(a) + "]";
        if (!row.is_array() || static_cast<int>(row.size()) != m)
            throw ConfigError(row_path, "expected " + std::to_string(m) + " entries");
        std::vector<MatrixSchedule> grow;
        for (int b = 0; b < m; ++b)
            grow.push_back(parse_schedule(row[b], n, row_path + "[" + std::to_string(b) + "]"));
        g.push_back(std::move(grow));
    }

    std::vector<std::string> labels;
    if (model.contains("labels")) {
        const json& ls = model["labels"];
        if (!ls.is_array()) throw ConfigError(path + ".labels", "expected an array");
        for (std::size_t i = 0; i < ls.size(); ++i) {
            if (!ls[i].is_string())
                throw ConfigError(path + ".labels[" + std::to_string(i) + "]",
                                  "expected a string");
            labels.push_back(ls[i].get<std::string>());
        }
    }

    try {
        return HybridModel::build(n, m, std::move(h), std::move(g), std::move(labels));
    } catch (const NonzeroDiagonalCoupling& e) {
        throw ConfigError(path + ".couplings[" + std::to_string(e.alpha - 1) + "][" +
                              std::to_string(e.alpha - 1) + "]",
                          e.what());
    } catch (const NonHermitianHamiltonian& e) {
        throw ConfigError(path + ".hamiltonians[" + std::to_string(e.alpha - 1) + "]", e.what());
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
}

json complex_to_json(const Complex& c) { return json::array({c.real(), c.imag()}); }

}  // namespace

TrajectoryParams SimulationSpec::trajectory_params() const {
    TrajectoryParams p;
    if (run.scheme == "fixed-dt")
        p.scheme = FixedDt{run.dt};
    else
        p.scheme = NormThreshold{run.ode_tol, run.root_tol};
    p.t_end = run.t_end;
    p.sample_times = run.sample_times;
    p.max_events = run.max_events;
    return p;
}

json SimulationSpec::to_json() const {
    json j;
    j["model"] = model_json;
    json psi = json::array();
    for (Eigen::Index i = 0; i < initial.psi.size(); ++i)
        psi.push_back(complex_to_json(initial.psi(i)));
    j["initial"] = {{"psi", psi}, {"alpha", initial.alpha + 1}};
    json r;
    r["scheme"] = run.scheme;
    r["dt"] = run.dt;
    r["ode_tol"] = run.ode_tol;
    r["root_tol"] = run.root_tol;
    r["t_end"] = run.t_end;
    r["sample_times"] = run.sample_times;
    r["n_trajectories"] = run.n_trajectories;
    r["master_seed"] = run.master_seed;
    r["max_events"] = run.max_events;
    r["master_dt"] = run.master_dt;
    j["run"] = r;
    j["output"] = {{"directory", output.directory}, {"formats", output.formats}};
    return j;
}

SimulationSpec parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("syntax error: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("", "top level must be an object");

    json model_json = require_field(doc, "", "model");
    HybridModel model = parse_model(model_json, "model");
    const int n = model.quantum_dim();
    const int m = model.sector_count();

    const json& initial = require_field(doc, "", "initial");
    const json& psi_json = require_field(initial, "initial", "psi");
    if (!psi_json.is_array() || static_cast<int>(psi_json.size()) != n)
        throw ConfigError("initial.psi", "expected " + std::to_string(n) + " amplitudes");
    ComplexVector psi(n);
    for (int i = 0; i < n; ++i)
        psi(i) = parse_complex(psi_json[i], "initial.psi[" + std::to_string(i) + "]");
    const auto alpha1 =
        static_cast<int>(as_count(require_field(initial, "initial", "alpha"), "initial.alpha"));
    if (alpha1 < 1 || alpha1 > m)
        throw ConfigError("initial.alpha", "sector must lie in 1.." + std::to_string(m));

    std::vector<std::string> warnings;
    const double n2 = psi.squaredNorm();
    if (n2 <= 0.0) throw ConfigError("initial.psi", "state vector is zero");
    if (std::abs(n2 - 1.0) > 1e-6) {
        std::ostringstream msg;
        msg << "initial.psi had squared norm " << n2 << "; normalized";
        warnings.push_back(msg.str());
    }
    psi /= std::sqrt(n2);

    RunParams run;
    const json& run_json = require_field(doc, "", "run");
    run.t_end = as_number(require_field(run_json, "run", "t_end"), "run.t_end");
    if (!(run.t_end >= 0.0)) throw ConfigError("run.t_end", "must be non-negative");
    if (run_json.contains("scheme")) {
        if (!run_json["scheme"].is_string()) throw ConfigError("run.scheme", "expected a string");
        run.scheme = run_json["scheme"].get<std::string>();
        if (run.scheme != "fixed-dt" && run.scheme != "norm-threshold")
            throw ConfigError("run.scheme", "must be 'fixed-dt' or 'norm-threshold'");
    }
    if (run_json.contains("dt")) run.dt = as_number(run_json["dt"], "run.dt");
    if (!(run.dt > 0.0)) throw ConfigError("run.dt", "must be positive");
    if (run_json.contains("ode_tol")) run.ode_tol = as_number(run_json["ode_tol"], "run.ode_tol");
    if (run_json.contains("root_tol"))
        run.root_tol = as_number(run_json["root_tol"], "run.root_tol");
    if (!(run.ode_tol > 0.0)) throw ConfigError("run.ode_tol", "must be positive");
    if (!(run.root_tol > 0.0)) throw ConfigError("run.root_tol", "must be positive");
    if (run_json.contains("master_dt"))
        run.master_dt = as_number(run_json["master_dt"], "run.master_dt");
    if (!(run.master_dt > 0.0)) throw ConfigError("run.master_dt", "must be positive");
    if (run_json.contains("n_trajectories"))
        run.n_trajectories = as_count(run_json["n_trajectories"], "run.n_trajectories");
    if (run.n_trajectories < 1) throw ConfigError("run.n_trajectories", "must be >= 1");
    if (run_json.contains("master_seed"))
        run.master_seed = as_count(run_json["master_seed"], "run.master_seed");
    if (run_json.contains("max_events"))
        run.max_events = as_count(run_json["max_events"], "run.max_events");
    if (run.max_events < 1) throw ConfigError("run.max_events", "must be >= 1");

    if (run_json.contains("sample_times")) {
        const json& st = run_json["sample_times"];
        if (!st.is_array()) throw ConfigError("run.sample_times", "expected an array");
        for (std::size_t i = 0; i < st.size(); ++i) {
            const std::string p = "run.sample_times[" + std::to_string(i) + "]";
            const double s = as_number(st[i], p);
            if (s < 0.0 || s > run.t_end) throw ConfigError(p, "outside [0, t_end]");
            if (i > 0 && !(run.sample_times.back() < s))
                throw ConfigError(p, "sample times must be strictly ascending");
            run.sample_times.push_back(s);
        }
    } else {
        for (int i = 0; i <= 10; ++i) run.sample_times.push_back(run.t_end * i / 10.0);
        if (run.t_end == 0.0) run.sample_times = {0.0};
    }

    OutputParams output;
    if (doc.contains("output")) {
        const json& out = doc["output"];
        if (!out.is_object()) throw ConfigError("output", "expected an object");
        if (out.contains("directory")) {
            if (!out["directory"].is_string())
                throw ConfigError("output.directory", "expected a string");
            output.directory = out["directory"].get<std::string>();
        }
        if (out.contains("formats")) {
            const json& fm = out["formats"];
            if (!fm.is_array()) throw ConfigError("output.formats", "expected an array");
            output.formats.clear();
            for (std::size_t i = 0; i < fm.size(); ++i) {
                if (!fm[i].is_string() || fm[i].get<std::string>() != "csv")
                    throw ConfigError("output.formats[" + std::to_string(i) + "]",
                                      "only 'csv' is supported");
                output.formats.push_back(fm[i].get<std::string>());
            }
        }
    }

    return SimulationSpec{std::move(model_json),
                          std::move(model),
                          PureHybridState{std::move(psi), alpha1 - 1},
                          std::move(run),
                          std::move(output),
                          std::move(warnings)};
}

SimulationSpec parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace eeqt
