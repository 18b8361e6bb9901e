// SPDX-License-Identifier: Apache-2.0
#include "grassq/codebook_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "grassq/error.hpp"

namespace grassq {

namespace {

constexpr const char* kFormatTag = "grassq-codebook";

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

template <typename T>
T field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("codebook file is missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(std::string("codebook field '") + key + "' has the wrong type");
  }
}

ProvenanceKind kind_from_name(const std::string& s) {
  if (s == "random") return ProvenanceKind::Random;
  if (s == "maxmin") return ProvenanceKind::MaxMin;
  if (s == "loaded") return ProvenanceKind::Loaded;
  throw FormatError("unknown provenance kind '" + s + "'");
}

}  // namespace

std::string serialize_codebook(const Codebook& C) {
  const auto& code = C.code_spec();
  const auto& prov = C.provenance();
  std::string out = "{\n";
  out += "  \"format\": \"" + std::string(kFormatTag) + "\",\n  \"version\": 1,\n";
  out += "  \"n\": " + std::to_string(code.n) + ",\n";
  out += "  \"p\": " + std::to_string(C.source_spec().p) + ",\n";
  out += "  \"q\": " + std::to_string(code.p) + ",\n";
  out += "  \"beta\": " + std::to_string(code.beta()) + ",\n";
  out += "  \"K\": " + std::to_string(C.size()) + ",\n";
  out += "  \"provenance\": {\"kind\": \"" + std::string(provenance_name(prov.kind)) +
         "\", \"seed\": " + std::to_string(prov.seed);
  if (!prov.path.empty()) out += ", \"path\": " + nlohmann::json(prov.path).dump();
  out += ", \"trace\": [";
  for (std::size_t i = 0; i < prov.trace.size(); ++i) {
    if (i) out += ", ";
    if (std::isfinite(prov.trace[i])) append_double(out, prov.trace[i]);
    else out += "null";
  }
  out += "]},\n  \"entries\": [\n";
  for (std::size_t k = 0; k < C.size(); ++k) {
    const Matrix& B = C[k].basis();
    out += "    [";
    bool first = true;
    for (Eigen::Index r = 0; r < B.rows(); ++r) {
      for (Eigen::Index c = 0; c < B.cols(); ++c) {
        if (!first) out += ", ";
        first = false;
        append_double(out, B(r, c).real());
        out += ", ";
        append_double(out, B(r, c).imag());
      }
    }
    out += k + 1 < C.size() ? "],\n" : "]\n";
  }
  out += "  ]\n}\n";
  return out;
}

Codebook parse_codebook(std::string_view text, const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("codebook file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("codebook file must hold a JSON object");
  if (field<std::string>(j, "format") != kFormatTag) throw FormatError("not a grassq codebook file");
  if (field<int>(j, "version") != 1) throw FormatError("unsupported codebook file version");

  const int n = field<int>(j, "n");
  const int p = field<int>(j, "p");
  const int q = field<int>(j, "q");
  const int beta = field<int>(j, "beta");
  const auto K = field<std::size_t>(j, "K");

  FieldKind fk;
  GrassmannSpec source, code;
  try {
    fk = field_from_beta(beta);
    source = GrassmannSpec::make(n, p, fk);
    code = GrassmannSpec::make(n, q, fk);
  } catch (const DomainError& e) {
    throw FormatError(std::string("invalid codebook header: ") + e.what());
  }

  Provenance prov{ProvenanceKind::Loaded, 0, {}, origin};
  if (j.contains("provenance")) {
    const auto& pj = j.at("provenance");
    if (!pj.is_object()) throw FormatError("provenance must be an object");
    // The on-disk kind is informational; a loaded book is always Loaded.
    kind_from_name(field<std::string>(pj, "kind"));
    prov.seed = field<std::uint64_t>(pj, "seed");
    if (pj.contains("trace")) {
      for (const auto& v : pj.at("trace")) prov.trace.push_back(v.is_number() ? v.get<double>() : NAN);
    }
  }

  if (!j.contains("entries")) throw FormatError("codebook file is missing 'entries'");
  const auto& ej = j.at("entries");
  if (!ej.is_array() || ej.size() != K) {
    throw FormatError("expected " + std::to_string(K) + " entries, found " +
                      std::to_string(ej.is_array() ? ej.size() : 0));
  }
  const std::size_t width = 2 * static_cast<std::size_t>(n) * q;
  std::vector<Plane> entries;
  entries.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& row = ej[k];
    if (!row.is_array() || row.size() != width) {
      throw FormatError("entry " + std::to_string(k) + " must hold " + std::to_string(width) +
                        " numbers");
    }
    Matrix B(n, q);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < q; ++c) {
        const auto& re = row[2 * (r * q + c)];
        const auto& im = row[2 * (r * q + c) + 1];
        if (!re.is_number() || !im.is_number())
          throw FormatError("entry " + std::to_string(k) + " has a non-numeric element");
        B(r, c) = Complex(re.get<double>(), im.get<double>());
      }
    }
    try {
      entries.push_back(Plane::from_orthonormal(code, std::move(B)));
    } catch (const OrthonormalityError& e) {
      throw OrthonormalityError("entry " + std::to_string(k) + ": " + e.what());
    } catch (const DomainError& e) {
      throw FormatError("entry " + std::to_string(k) + ": " + e.what());
    }
  }
  return Codebook::create(source, code, std::move(entries), std::move(prov));
}

void save_codebook(const Codebook& C, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << serialize_codebook(C);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Codebook load_codebook(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open codebook file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_codebook(ss.str(), path.string());
}

}  // namespace grassq
