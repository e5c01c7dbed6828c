#include "ocsplab/textio.hpp"

#include <fstream>
#include <sstream>

#include "ocsplab/error.hpp"

namespace ocsplab {

namespace {
std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}
}  // namespace

KvRecord KvRecord::parse(std::string_view text) {
  KvRecord rec;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw Error(Errc::malformed_record, "line " + std::to_string(line_no) + ": expected key=value");
    }
    rec.add(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
  }
  return rec;
}

std::optional<std::string> KvRecord::get(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string KvRecord::require(std::string_view key) const {
  if (auto v = get(key)) return *v;
  throw Error(Errc::malformed_record, "missing key '" + std::string(key) + "'");
}

std::vector<std::string> KvRecord::all(std::string_view key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (k == key) out.push_back(v);
  }
  return out;
}

std::string KvRecord::render() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
}

Bytes read_binary_file(const std::filesystem::path& path) {
  const std::string s = read_text_file(path);
  return Bytes(s.begin(), s.end());
}

void write_binary_file(const std::filesystem::path& path, ByteView data) {
  write_text_file(path, std::string_view(reinterpret_cast<const char*>(data.data()), data.size()));
}

}  // namespace ocsplab
