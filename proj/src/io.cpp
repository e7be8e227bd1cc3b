#include "delayadm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "delayadm/error.hpp"

namespace delayadm {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v == 0.0 ? 0.0 : v);
  return buf;
}

namespace {

void escape_string(std::string& out, const std::string& s) {
  out += '"';
  for (const unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
}

bool is_scalar(const Json& j) { return !j.is_object() && !j.is_array(); }

void emit(std::string& out, const Json& j, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent <= 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::null: out += "null"; break;
    case Json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; break;
    case Json::value_t::number_integer: out += std::to_string(j.get<std::int64_t>()); break;
    case Json::value_t::number_unsigned: out += std::to_string(j.get<std::uint64_t>()); break;
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      break;
    }
    case Json::value_t::string: escape_string(out, j.get_ref<const std::string&>()); break;
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        break;
      }
      // Arrays of scalars stay on one line so numeric tables remain compact.
      bool flat = true;
      for (const auto& e : j) flat = flat && is_scalar(e);
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat && indent > 0 ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        emit(out, e, indent, depth + 1);
      }
      if (!flat) newline(depth);
      out += ']';
      break;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        break;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        escape_string(out, it.key());
        out += indent > 0 ? ": " : ":";
        emit(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out += '}';
      break;
    }
    default: out += "null";
  }
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::string out;
  emit(out, j, indent, 0);
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw ConfigError("write to '" + path + "' failed");
}

void write_json_file(const std::string& path, const Json& j) {
  write_text_file(path, dump_json(j) + "\n");
}

Json complex_to_json(cplx z) { return Json::array({z.real(), z.imag()}); }

cplx complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  throw ConfigError("expected a number or an [re, im] pair, got " + j.dump());
}

Json matrix_to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_to_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const Json& j, const char* what) {
  if (j.is_number()) {
    CMatrix m(1, 1);
    m(0, 0) = j.get<double>();
    return m;
  }
  if (!j.is_array() || j.empty()) {
    throw ConfigError(std::string(what) + ": expected a nonempty array of rows");
  }
  const std::size_t rows = j.size();
  if (!j[0].is_array()) throw ConfigError(std::string(what) + ": rows must be arrays");
  const std::size_t cols = j[0].size();
  if (cols == 0) throw ConfigError(std::string(what) + ": empty row");
  CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw ConfigError(std::string(what) + ": row " + std::to_string(i) + " has " +
                        std::to_string(j[i].is_array() ? j[i].size() : 0) + " entries, expected " +
                        std::to_string(cols));
    }
    for (std::size_t k = 0; k < cols; ++k) {
      try {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = complex_from_json(j[i][k]);
      } catch (const ConfigError& e) {
        throw ConfigError(std::string(what) + "[" + std::to_string(i) + "][" + std::to_string(k) +
                          "]: " + e.what());
      }
    }
  }
  require_finite(m, what);
  return m;
}

Json state_to_json(const LiftedState& v) {
  Json head = Json::array();
  for (Eigen::Index i = 0; i < v.head.size(); ++i) head.push_back(complex_to_json(v.head(i)));
  Json tail = Json::object();
  tail["m"] = v.m();
  tail["values"] = matrix_to_json(v.tail.values());
  Json out = Json::object();
  out["head"] = std::move(head);
  out["tail"] = std::move(tail);
  return out;
}

LiftedState state_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("head") || !j.contains("tail")) {
    throw ConfigError("lifted state: expected an object with 'head' and 'tail'");
  }
  const Json& h = j.at("head");
  if (!h.is_array() || h.empty()) throw ConfigError("lifted state: 'head' must be a nonempty array");
  CVector head(static_cast<Eigen::Index>(h.size()));
  for (std::size_t i = 0; i < h.size(); ++i) head(static_cast<Eigen::Index>(i)) = complex_from_json(h[i]);
  const Json& t = j.at("tail");
  if (!t.contains("m") || !t.at("m").is_number_integer()) {
    throw ConfigError("lifted state: 'tail.m' must be an integer");
  }
  const int m = t.at("m").get<int>();
  CMatrix values = matrix_from_json(t.at("values"), "lifted state tail");
  if (values.cols() != head.size()) {
    throw DimensionError("lifted state: head has dimension " + std::to_string(head.size()) +
                         ", tail rows have " + std::to_string(values.cols()));
  }
  return LiftedState(std::move(head), HistorySegment(m, std::move(values)));
}

void write_matrix_csv(std::ostream& os, const CMatrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      if (k > 0) os << ',';
      os << format_double(m(i, k).real()) << ',' << format_double(m(i, k).imag());
    }
    os << '\n';
  }
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace delayadm
