#include "hmmsbm/trace_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "hmmsbm/errors.hpp"
#include "hmmsbm/series_io.hpp"

namespace hmmsbm {

namespace {

using nlohmann::json;

json rows(const std::vector<double>& flat, std::size_t k) {
  json out = json::array();
  for (std::size_t r = 0; r < k; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < k; ++c) row.push_back(flat[r * k + c]);
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<double> flatten(const json& j, std::size_t k, const char* what) {
  if (!j.is_array() || j.size() != k) throw InputError(std::string("trace: bad ") + what + " matrix");
  std::vector<double> out;
  out.reserve(k * k);
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != k) throw InputError(std::string("trace: bad ") + what + " matrix");
    for (const auto& v : row) out.push_back(v.get<double>());
  }
  return out;
}

json sample_json(const ModelState& ms, std::size_t iteration, double loglik) {
  json j;
  j["iteration"] = iteration;
  j["loglik"] = loglik;
  j["gamma"] = ms.gamma;
  j["zeta"] = ms.zeta;
  j["pi"] = rows(ms.pi, ms.max_states());
  j["rates"] = {{"d_O", ms.rates.d_off}, {"e_O", ms.rates.e_off}, {"d_D", ms.rates.d_diag}, {"e_D", ms.rates.e_diag}};
  const auto occ = ms.occupied();
  json states = json::array();
  for (std::size_t s = 0; s < ms.max_states(); ++s) {
    const auto& st = ms.states[s];
    json o;
    o["occupied"] = static_cast<bool>(occ[s]);
    o["xi"] = st.xi.labels();
    o["theta"] = rows(st.theta.values(), st.theta.blocks());
    o["alpha"] = st.py.alpha;
    o["beta"] = st.py.beta;
    o["a_O"] = st.bh.a_off;
    o["b_O"] = st.bh.b_off;
    o["a_D"] = st.bh.a_diag;
    o["b_D"] = st.bh.b_diag;
    states.push_back(std::move(o));
  }
  j["states"] = std::move(states);
  return j;
}

}  // namespace

void write_trace_jsonl(const ChainTrace& trace, std::ostream& out) {
  for (std::size_t b = 0; b < trace.samples.size(); ++b) {
    const double ll = b < trace.sample_loglik.size() ? trace.sample_loglik[b] : 0.0;
    const std::size_t it = b < trace.sample_iterations.size() ? trace.sample_iterations[b] : b + 1;
    out << sample_json(trace.samples[b], it, ll).dump() << '\n';
  }
}

void write_trace_jsonl(const ChainTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  write_trace_jsonl(trace, out);
}

ChainTrace read_trace_jsonl(std::istream& in) {
  ChainTrace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      ModelState ms;
      ms.gamma = j.at("gamma").get<double>();
      ms.zeta = j.at("zeta").get<std::vector<int>>();
      const auto& rates = j.at("rates");
      ms.rates = {rates.at("d_O").get<double>(), rates.at("e_O").get<double>(), rates.at("d_D").get<double>(),
                  rates.at("e_D").get<double>()};
      const auto& states = j.at("states");
      const std::size_t S = states.size();
      ms.pi = flatten(j.at("pi"), S, "pi");
      ms.states.resize(S);
      for (std::size_t s = 0; s < S; ++s) {
        const auto& o = states[s];
        auto& st = ms.states[s];
        st.xi = Partition(o.at("xi").get<std::vector<int>>());
        const auto& th = o.at("theta");
        const auto vals = flatten(th, th.size(), "theta");
        st.theta = InteractionMatrix(th.size(), 0.0);
        for (std::size_t k = 0; k < th.size(); ++k)
          for (std::size_t l = 0; l < th.size(); ++l) st.theta(k, l) = vals[k * th.size() + l];
        st.py = {o.at("alpha").get<double>(), o.at("beta").get<double>()};
        st.bh = {o.at("a_O").get<double>(), o.at("b_O").get<double>(), o.at("a_D").get<double>(),
                 o.at("b_D").get<double>()};
      }
      if (!ms.states.empty()) ms.validate(ms.states[0].xi.size());
      trace.samples.push_back(std::move(ms));
      trace.sample_iterations.push_back(j.at("iteration").get<std::size_t>());
      trace.sample_loglik.push_back(j.at("loglik").get<double>());
    } catch (const json::exception& e) {
      throw InputError("trace line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw InputError("trace line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::domain_error& e) {
      throw InputError("trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (trace.samples.empty()) throw InputError("trace file holds no samples");
  return trace;
}

ChainTrace read_trace_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open trace " + path.string());
  return read_trace_jsonl(in);
}

void write_diagnostics_csv(const std::vector<TraceScalars>& scalars, std::ostream& out) {
  out << "iteration,loglik,S_star,acc_gamma,acc_ab_diag,acc_ab_off,acc_py,upsilon_mean,upsilon_var,chi_mean,chi_var\n";
  for (const auto& s : scalars) {
    out << s.iteration << ',' << format_double(s.loglik) << ',' << s.occupied_states << ','
        << format_double(s.acc_gamma) << ',' << format_double(s.acc_ab_diag) << ',' << format_double(s.acc_ab_off)
        << ',' << format_double(s.acc_py) << ',' << format_double(s.upsilon_mean) << ','
        << format_double(s.upsilon_var) << ',' << format_double(s.chi_mean) << ',' << format_double(s.chi_var)
        << '\n';
  }
}

void write_diagnostics_csv(const std::vector<TraceScalars>& scalars, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  write_diagnostics_csv(scalars, out);
}

std::vector<TraceScalars> read_diagnostics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("iteration,loglik,S_star", 0) != 0) throw InputError("diagnostics: unexpected header");
  std::vector<TraceScalars> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[11];
    for (auto& x : f)
      if (!std::getline(ss, x, ',')) throw InputError("diagnostics: short row");
    TraceScalars s;
    try {
      s.iteration = std::stoull(f[0]);
      s.loglik = std::stod(f[1]);
      s.occupied_states = std::stoull(f[2]);
      s.acc_gamma = std::stod(f[3]);
      s.acc_ab_diag = std::stod(f[4]);
      s.acc_ab_off = std::stod(f[5]);
      s.acc_py = std::stod(f[6]);
      s.upsilon_mean = std::stod(f[7]);
      s.upsilon_var = std::stod(f[8]);
      s.chi_mean = std::stod(f[9]);
      s.chi_var = std::stod(f[10]);
    } catch (const std::logic_error&) {
      throw InputError("diagnostics: bad number in row " + line);
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace hmmsbm
