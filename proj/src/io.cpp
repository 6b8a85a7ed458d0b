#include "tfqudit/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tfqudit/error.hpp"

namespace tfq::io {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary tag format assumes a little-endian host");

template <class T>
void put(std::string& buf, T value) {
  char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  buf.append(raw, sizeof(T));
}

template <class T>
T get(std::string_view buf, std::size_t offset) {
  T value;
  std::memcpy(&value, buf.data() + offset, sizeof(T));
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class T>
T parse_number(std::string_view s, std::size_t line_no) {
  s = trim(s);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw DataError("line " + std::to_string(line_no) + ": cannot parse '" + std::string(s) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    out.push_back(line.substr(pos, next == std::string_view::npos ? next : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

TagSet assemble(std::map<std::uint8_t, std::vector<Picoseconds>>& raw, double duration_s) {
  TagSet out;
  for (auto& [ch, tags] : raw) {
    std::sort(tags.begin(), tags.end());
    out.emplace(ch, TagStream(ch, std::move(tags), duration_s));
  }
  return out;
}

TagSet parse_tags_binary(std::string_view buf) {
  if (buf.size() < 24) throw DataError("binary tag file truncated");
  const double duration_s = get<double>(buf, 8);
  const auto count = get<std::uint64_t>(buf, 16);
  if (buf.size() != 24 + count * 9) throw DataError("binary tag file size does not match record count");
  std::map<std::uint8_t, std::vector<Picoseconds>> raw;
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::size_t off = 24 + k * 9;
    const auto ch = get<std::uint8_t>(buf, off);
    const auto t = get<std::uint64_t>(buf, off + 1);
    raw[ch].push_back(static_cast<Picoseconds>(t));
  }
  return assemble(raw, duration_s);
}

TagSet parse_tags_csv(std::string_view text) {
  std::map<std::uint8_t, std::vector<Picoseconds>> raw;
  double duration_s = 0.0;
  Picoseconds last = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto eq = line.find("duration_s=");
      if (eq != std::string_view::npos) {
        duration_s = parse_number<double>(line.substr(eq + 11), line_no);
      }
      continue;
    }
    if (line.starts_with("channel")) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2) throw DataError("line " + std::to_string(line_no) + ": expected channel,time_ps");
    const auto ch = parse_number<unsigned>(fields[0], line_no);
    if (ch > 255) throw DataError("line " + std::to_string(line_no) + ": channel out of range");
    const auto t = parse_number<Picoseconds>(fields[1], line_no);
    raw[static_cast<std::uint8_t>(ch)].push_back(t);
    last = std::max(last, t);
  }
  if (duration_s <= 0.0) duration_s = std::max<double>(1.0, static_cast<double>(last)) * 1e-12;
  return assemble(raw, duration_s);
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

TagSet read_tags(const std::filesystem::path& path) {
  const std::string buf = read_text(path);
  if (std::string_view(buf).starts_with(tag_magic)) return parse_tags_binary(buf);
  return parse_tags_csv(buf);
}

void write_tags(const std::filesystem::path& path, const std::vector<TagStream>& streams,
                TagFormat format) {
  double duration_s = 0.0;
  std::size_t count = 0;
  for (const auto& s : streams) {
    duration_s = std::max(duration_s, s.duration_s());
    count += s.size();
  }
  // records interleaved in time order, ties by channel
  std::vector<std::pair<Picoseconds, std::uint8_t>> records;
  records.reserve(count);
  for (const auto& s : streams) {
    for (Picoseconds t : s.tags()) records.emplace_back(t, s.channel());
  }
  std::sort(records.begin(), records.end());

  std::string buf;
  if (format == TagFormat::binary) {
    buf.reserve(24 + 9 * count);
    buf.append(tag_magic);
    put(buf, duration_s);
    put(buf, static_cast<std::uint64_t>(count));
    for (const auto& [t, ch] : records) {
      put(buf, ch);
      put(buf, static_cast<std::uint64_t>(t));
    }
  } else {
    std::ostringstream out;
    out.precision(17);
    out << "# duration_s=" << duration_s << "\nchannel,time_ps\n";
    for (const auto& [t, ch] : records) out << static_cast<unsigned>(ch) << ',' << t << '\n';
    buf = std::move(out).str();
  }
  write_atomic(path, buf);
}

CoincidenceMatrix parse_matrix(std::string_view text) {
  const std::size_t header_end = text.find('\n');
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text.substr(0, header_end));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("matrix header is not valid JSON: ") + e.what());
  }
  const auto d = header.at("d").get<std::size_t>();
  const auto basis = basis_pair_from_string(header.at("basis_pair").get<std::string>());
  const double duration = header.value("duration", 0.0);
  const std::string format = header.value("format", "dense");
  if (d < 2) throw DataError("matrix dimension must be >= 2");

  CountGrid grid(d);
  std::size_t row = 0;
  std::size_t line_no = 1;
  std::size_t pos = header_end == std::string_view::npos ? text.size() : header_end + 1;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (format == "sparse") {
      if (fields.size() != 3) throw DataError("line " + std::to_string(line_no) + ": expected i,j,count");
      const auto i = parse_number<std::size_t>(fields[0], line_no);
      const auto j = parse_number<std::size_t>(fields[1], line_no);
      if (i >= d || j >= d) throw DataError("line " + std::to_string(line_no) + ": index out of range");
      grid(i, j) += parse_number<std::uint64_t>(fields[2], line_no);
    } else if (format == "dense") {
      if (row >= d || fields.size() != d) {
        throw DataError("line " + std::to_string(line_no) + ": dense row shape mismatch");
      }
      for (std::size_t j = 0; j < d; ++j) grid(row, j) = parse_number<std::uint64_t>(fields[j], line_no);
      ++row;
    } else {
      throw DataError("unknown matrix format '" + format + "'");
    }
  }
  if (format == "dense" && row != d) throw DataError("dense matrix has too few rows");
  return CoincidenceMatrix(std::move(grid), basis, duration);
}

CoincidenceMatrix read_matrix(const std::filesystem::path& path) {
  return parse_matrix(read_text(path));
}

std::string format_matrix(const CoincidenceMatrix& m, MatrixFormat format) {
  nlohmann::json header = {
      {"d", m.dim()},
      {"basis_pair", std::string(to_string(m.basis()))},
      {"duration", m.duration_s()},
      {"format", format == MatrixFormat::dense ? "dense" : "sparse"},
  };
  std::string out = header.dump();
  out += '\n';
  const std::size_t d = m.dim();
  char num[32];
  for (std::size_t i = 0; i < d; ++i) {
    if (format == MatrixFormat::dense) {
      for (std::size_t j = 0; j < d; ++j) {
        if (j) out += ',';
        const auto r = std::to_chars(num, num + sizeof num, m(i, j));
        out.append(num, r.ptr);
      }
      out += '\n';
    } else {
      for (std::size_t j = 0; j < d; ++j) {
        if (m(i, j) == 0) continue;
        out += std::to_string(i);
        out += ',';
        out += std::to_string(j);
        out += ',';
        out += std::to_string(m(i, j));
        out += '\n';
      }
    }
  }
  return out;
}

void write_matrix(const std::filesystem::path& path, const CoincidenceMatrix& m,
                  MatrixFormat format) {
  write_atomic(path, format_matrix(m, format));
}

}  // namespace tfq::io
