#include "wanco/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace wanco {

namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

std::filesystem::path manifest_path(const std::filesystem::path& bin) {
  auto p = bin;
  p += ".json";
  return p;
}

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return r;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_history_csv(std::ostream& out, const RunHistory& h) {
  out << kCsvSchema << '\n' << "iteration,loss,objective";
  for (std::size_t i = 0; i < h.constraint_names.size(); ++i) {
    const auto& c = h.constraint_names[i];
    const bool abs = i < h.absolute_error.size() && h.absolute_error[i];
    out << ',' << c << "_achieved," << c << "_residual," << c << (abs ? "_abs_error" : "_rel_error");
  }
  for (const auto& m : h.multiplier_names) out << ',' << m;
  for (const auto& c : h.channel_names) out << ",beta_" << c;
  out << ",lr_primal,lr_adversarial\n";
  for (const auto& r : h.records) {
    out << r.iteration << ',' << format_double(r.loss) << ',' << format_double(r.objective);
    for (std::size_t i = 0; i < r.achieved.size(); ++i) {
      out << ',' << format_double(r.achieved[i]) << ',' << format_double(r.residual[i]) << ','
          << format_double(r.relative[i]);
    }
    for (double m : r.multipliers) out << ',' << format_double(m);
    for (double b : r.betas) out << ',' << format_double(b);
    out << ',' << format_double(r.lr_primal) << ',' << format_double(r.lr_adversarial) << '\n';
  }
}

void write_history_csv(const std::filesystem::path& path, const RunHistory& history) {
  auto out = open_out(path);
  write_history_csv(out, history);
}

void write_params(const std::filesystem::path& bin, const ParamStore& params, const Json& config) {
  {
    auto out = open_out(bin, std::ios::out | std::ios::binary);
    for (double v : params.values()) {
      const std::uint64_t word = to_little(std::bit_cast<std::uint64_t>(v));
      out.write(reinterpret_cast<const char*>(&word), sizeof word);
    }
  }
  Json manifest;
  manifest["format"] = "wanco-params";
  manifest["version"] = 1;
  manifest["dtype"] = "f64";
  manifest["byte_order"] = "little";
  manifest["count"] = params.size();
  Json segs = Json::array();
  for (const auto& s : params.segments()) segs.push_back({{"name", s.name}, {"offset", s.offset}, {"length", s.length}});
  manifest["segments"] = segs;
  manifest["config"] = config;
  auto out = open_out(manifest_path(bin));
  out << manifest.dump(2) << '\n';
}

StoredParams read_params(const std::filesystem::path& bin) {
  StoredParams stored;
  stored.manifest = read_json_file(manifest_path(bin));
  const Json& m = stored.manifest;
  if (!m.is_object() || m.value("format", "") != "wanco-params" || m.value("dtype", "") != "f64" ||
      m.value("byte_order", "") != "little" || !m.contains("count") || !m.contains("segments")) {
    throw ConfigError("'" + manifest_path(bin).string() + "' is not a wanco parameter manifest");
  }
  const auto count = m["count"].get<std::size_t>();
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + bin.string() + "'");
  stored.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t word = 0;
    if (!in.read(reinterpret_cast<char*>(&word), sizeof word)) {
      throw ConfigError("'" + bin.string() + "' holds fewer values than its manifest");
    }
    stored.values[i] = std::bit_cast<double>(to_little(word));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ConfigError("'" + bin.string() + "' holds more values than its manifest");
  }
  return stored;
}

ParamStore bind_params(const Problem& problem, const StoredParams& stored) {
  ParamStore store = problem.make_layout();
  const Json& segs = stored.manifest["segments"];
  const auto& expected = store.segments();
  if (!segs.is_array() || segs.size() != expected.size() || stored.values.size() != store.size()) {
    throw ConfigError("parameter manifest does not match the network configuration");
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const Json& s = segs[i];
    if (s.value("name", "") != expected[i].name || s.value("offset", std::size_t{0}) != expected[i].offset ||
        s.value("length", std::size_t{0}) != expected[i].length) {
      throw ConfigError("parameter manifest segment " + std::to_string(i) + " does not match '" + expected[i].name +
                        "'");
    }
  }
  std::copy(stored.values.begin(), stored.values.end(), store.values().begin());
  store.check_invariants();
  return store;
}

void write_grid_csv(std::ostream& out, const std::vector<std::string>& coords, const Matrix& x,
                    const std::vector<std::string>& names, const Matrix& values) {
  out << kCsvSchema << '\n';
  bool first = true;
  for (const auto* list : {&coords, &names}) {
    for (const auto& n : *list) {
      out << (first ? "" : ",") << n;
      first = false;
    }
  }
  out << '\n';
  for (Eigen::Index b = 0; b < x.cols(); ++b) {
    for (Eigen::Index k = 0; k < x.rows(); ++k) out << (k ? "," : "") << format_double(x(k, b));
    for (Eigen::Index k = 0; k < values.rows(); ++k) out << ',' << format_double(values(k, b));
    out << '\n';
  }
}

void write_summary(const std::filesystem::path& path, const Problem& problem, const TrainResult& result) {
  auto out = open_out(path);
  const Evaluation& e = result.final_eval;
  const auto& h = result.history;
  out << "family: " << problem.family() << '\n';
  out << "loss: " << format_double(e.loss) << '\n';
  out << "objective: " << format_double(e.objective) << '\n';
  for (const auto& t : e.terms) out << "term." << t.name << ": " << format_double(t.value) << '\n';
  for (std::size_t i = 0; i < e.constraints.size(); ++i) {
    const auto& c = e.constraints[i];
    const auto rel = relative_constraint_error(c.achieved, c.target);
    const std::string& name = h.constraint_names[i];
    out << name << ".achieved: " << format_double(c.achieved) << '\n';
    out << name << ".target: " << format_double(c.target) << '\n';
    out << name << (rel.absolute ? ".abs_error: " : ".rel_error: ") << format_double(rel.value) << '\n';
  }
  for (std::size_t i = 0; i < e.multipliers.size(); ++i) {
    out << h.multiplier_names[i] << ": " << format_double(e.multipliers[i]) << '\n';
  }
  for (std::size_t c = 0; c < result.final_betas.size(); ++c) {
    out << "beta." << h.channel_names[c] << ": " << format_double(result.final_betas[c]) << '\n';
  }
}

}  // namespace wanco
