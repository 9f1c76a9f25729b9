#include <zlib.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dtwin/errors.hpp"
#include "dtwin/io.hpp"
#include "dtwin/twin.hpp"

namespace dtwin::twin {

namespace {

using nlohmann::json;

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double unhex(const json& j, const char* what) {
  if (!j.is_string()) throw ModelParseError(std::string("field '") + what + "' must be a hex-float string");
  const std::string s = j.get<std::string>();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw ModelParseError(std::string("field '") + what + "' is not a number: " + s);
  return v;
}

json hex_array(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(hex(x));
  return a;
}

std::vector<double> unhex_array(const json& j, const char* what) {
  if (!j.is_array()) throw ModelParseError(std::string("field '") + what + "' must be an array");
  std::vector<double> out;
  for (const auto& e : j) out.push_back(unhex(e, what));
  return out;
}

std::uint32_t crc_of(const std::string& s) {
  return static_cast<std::uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(s.data()), static_cast<uInt>(s.size())));
}

}  // namespace

std::string serialize_model(const sysid::NarxModel& m) {
  m.validate();
  json j;
  j["output_lags"] = m.output_lags;
  j["input_lags"] = m.input_lags;
  j["sample_interval_s"] = hex(m.sample_interval);
  json terms = json::array();
  for (const auto& t : m.terms) {
    json e = json::array();
    for (auto x : t.exponents) e.push_back(static_cast<int>(x));
    terms.push_back(e);
  }
  j["terms"] = terms;
  j["coefficients"] = hex_array(m.coefficients);
  j["input_normalization"] = {{"center", hex(m.input.center)}, {"scale", hex(m.input.scale)}};
  j["output_normalization"] = {{"center", hex(m.output.center)}, {"scale", hex(m.output.scale)}};
  j["metadata"] = {{"training_cases", m.meta.training_cases},
                   {"fit_timestamp", m.meta.fit_timestamp},
                   {"format_version", m.meta.format_version},
                   {"ridge", hex(m.meta.ridge)},
                   {"ridge_fallback", m.meta.ridge_fallback},
                   {"training_rmse", hex(m.meta.training_rmse)},
                   {"selection_trace", hex_array(m.meta.selection_trace)},
                   {"selected_terms", m.meta.selected_terms}};
  const std::string payload = j.dump();
  char crc[32];
  std::snprintf(crc, sizeof crc, "crc32 %08x", crc_of(payload));
  return "dtrom " + std::to_string(kModelFormatVersion) + "\n" + payload + "\n" + crc + "\n";
}

sysid::NarxModel deserialize_model(const std::string& text) {
  std::istringstream in(text);
  std::string header, payload, crc_line;
  std::getline(in, header);
  int version = 0;
  char extra = 0;
  if (std::sscanf(header.c_str(), "dtrom %d%c", &version, &extra) != 1)
    throw ModelParseError("not a dtrom model file (bad header line)");
  if (version != kModelFormatVersion)
    throw ModelVersionError("model file version " + std::to_string(version) + " is not supported (expected " +
                            std::to_string(kModelFormatVersion) + ")");
  const bool have_payload = static_cast<bool>(std::getline(in, payload));
  unsigned stored = 0;
  if (!have_payload || !std::getline(in, crc_line) || crc_line.size() != 14 ||
      std::sscanf(crc_line.c_str(), "crc32 %8x", &stored) != 1)
    throw ModelChecksumError("model file checksum line missing or malformed (truncated file?)");
  if (stored != crc_of(payload)) throw ModelChecksumError("model file checksum mismatch");

  sysid::NarxModel m;
  try {
    const json j = json::parse(payload);
    m.output_lags = j.at("output_lags").get<int>();
    m.input_lags = j.at("input_lags").get<int>();
    m.sample_interval = unhex(j.at("sample_interval_s"), "sample_interval_s");
    for (const auto& t : j.at("terms")) {
      sysid::Term term;
      for (const auto& e : t) {
        const int p = e.get<int>();
        if (p < 0 || p > 255) throw ModelParseError("term exponent out of range");
        term.exponents.push_back(static_cast<std::uint8_t>(p));
      }
      m.terms.push_back(std::move(term));
    }
    m.coefficients = unhex_array(j.at("coefficients"), "coefficients");
    m.input.center = unhex(j.at("input_normalization").at("center"), "input center");
    m.input.scale = unhex(j.at("input_normalization").at("scale"), "input scale");
    m.output.center = unhex(j.at("output_normalization").at("center"), "output center");
    m.output.scale = unhex(j.at("output_normalization").at("scale"), "output scale");
    const auto& md = j.at("metadata");
    m.meta.training_cases = md.at("training_cases").get<std::vector<std::string>>();
    m.meta.fit_timestamp = md.at("fit_timestamp").get<std::string>();
    m.meta.format_version = md.at("format_version").get<int>();
    m.meta.ridge = unhex(md.at("ridge"), "ridge");
    m.meta.ridge_fallback = md.at("ridge_fallback").get<bool>();
    m.meta.training_rmse = unhex(md.at("training_rmse"), "training_rmse");
    m.meta.selection_trace = unhex_array(md.at("selection_trace"), "selection_trace");
    m.meta.selected_terms = md.at("selected_terms").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ModelParseError(std::string("model payload: ") + e.what());
  }
  try {
    m.validate();
  } catch (const DomainError& e) {
    throw ModelParseError(std::string("model payload: ") + e.what());
  }
  return m;
}

void export_model(const sysid::NarxModel& model, const std::string& path) {
  try {
    io::write_atomic(path, serialize_model(model));
  } catch (const IoError& e) {
    throw ModelFileError(e.what());
  }
}

sysid::NarxModel import_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ModelFileError("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace dtwin::twin
