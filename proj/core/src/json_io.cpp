#include "json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cosens/csv.hpp"

namespace cosens {

ojson load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_config("cannot open JSON file: " + path);
  ojson j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw_config("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

namespace {

void dump_string(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void dump_value(std::string& out, const ojson& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  switch (j.type()) {
    case ojson::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        out += pad_in;
        dump_string(out, it.key());
        out += ": ";
        dump_value(out, it.value(), indent, depth + 1);
        if (i + 1 < j.size()) out += ',';
        out += '\n';
      }
      out += pad + "}";
      return;
    }
    case ojson::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        out += pad_in;
        dump_value(out, j[i], indent, depth + 1);
        if (i + 1 < j.size()) out += ',';
        out += '\n';
      }
      out += pad + "]";
      return;
    }
    case ojson::value_t::string:
      dump_string(out, j.get_ref<const std::string&>());
      return;
    case ojson::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      return;
    case ojson::value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      return;
    case ojson::value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      return;
    case ojson::value_t::number_float: {
      double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";  // JSON has no NaN/Inf; flags carry the context
      } else {
        out += format_double(v);
      }
      return;
    }
    default:
      out += "null";
      return;
  }
}

}  // namespace

std::string dump_report(const ojson& j, int indent) {
  std::string out;
  dump_value(out, j, indent, 0);
  out += '\n';
  return out;
}

void write_report_file(const std::string& path, const ojson& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("cannot open report file for writing: " + path);
  out << dump_report(j);
  if (!out) throw_data("failed writing report file: " + path);
}

}  // namespace cosens
