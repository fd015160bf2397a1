#include "patternham/process.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_set>

#include "patternham/rng.hpp"

namespace patternham {

ColoredProcess generate(std::size_t n, int r, std::uint64_t seed, bool directed) {
  if (n < 2) throw ConfigError("process needs n >= 2, got " + std::to_string(n));
  if (r < 1) throw ConfigError("palette size must be positive");
  if (n > kMaxProcessVertices) {
    throw CapacityError("n = " + std::to_string(n) + " exceeds the process size limit of " +
                        std::to_string(kMaxProcessVertices));
  }
  const Step total = ColoredProcess::full_length(n, directed);

  std::vector<std::uint64_t> pairs;
  pairs.reserve(total);
  for (std::uint64_t a = 0; a < n; ++a) {
    for (std::uint64_t b = directed ? 0 : a + 1; b < n; ++b) {
      if (a != b) pairs.push_back(a << 32 | b);
    }
  }

  Xoshiro256 g(seed);
  ColoredProcess proc;
  proc.n = n;
  proc.r = r;
  proc.directed = directed;
  proc.seed = seed;
  proc.edges.resize(total);
  for (Step k = 0; k < total; ++k) {
    const Step j = k + bounded(g, total - k);
    std::swap(pairs[k], pairs[j]);
    const auto color = static_cast<Color>(1 + bounded(g, static_cast<std::uint64_t>(r)));
    auto a = static_cast<Vertex>(pairs[k] >> 32);
    auto b = static_cast<Vertex>(pairs[k] & 0xFFFFFFFFu);
    if (!directed && (g() >> 63)) std::swap(a, b);
    proc.edges[k] = {a, b, color};
  }
  return proc;
}

void advance(ColoredGraph& g, const ColoredProcess& proc, Step t) {
  if (t > proc.length()) {
    throw std::out_of_range("snapshot step " + std::to_string(t) + " beyond process length " +
                            std::to_string(proc.length()));
  }
  for (Step s = g.edge_count(); s < t; ++s) g.add_edge(proc.edges[s], s + 1);
}

ColoredGraph snapshot(const ColoredProcess& proc, Step t) {
  ColoredGraph g(proc.n, proc.r, proc.directed);
  advance(g, proc, t);
  return g;
}

void write_process(const ColoredProcess& proc, std::ostream& out) {
  out << "pcham v1 " << (proc.directed ? "directed" : "undirected") << " n=" << proc.n << " r=" << proc.r
      << " seed=" << proc.seed << '\n';
  std::string line;
  for (const auto& e : proc.edges) {
    line.clear();
    line += std::to_string(e.tail + 1);
    line += ' ';
    line += std::to_string(e.head + 1);
    line += ' ';
    line += std::to_string(e.color);
    line += '\n';
    out << line;
  }
}

namespace {

template <typename T>
bool parse_number(std::string_view s, T& value) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t next = line.find(' ', pos);
    if (next == std::string_view::npos) next = line.size();
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

template <typename T>
T header_field(std::string_view token, std::string_view key) {
  T value{};
  if (token.substr(0, key.size()) != key || !parse_number(token.substr(key.size()), value)) {
    throw ParseError(1, "expected " + std::string(key) + "<number>, got \"" + std::string(token) + "\"");
  }
  return value;
}

}  // namespace

ColoredProcess parse_process(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  auto head = split_spaces(line);
  if (head.size() != 6 || head[0] != "pcham" || head[1] != "v1") {
    throw ParseError(1, "expected header \"pcham v1 <undirected|directed> n=<n> r=<r> seed=<u64>\"");
  }
  ColoredProcess proc;
  if (head[2] == "directed") {
    proc.directed = true;
  } else if (head[2] != "undirected") {
    throw ParseError(1, "unknown kind \"" + std::string(head[2]) + "\"");
  }
  proc.n = header_field<std::size_t>(head[3], "n=");
  proc.r = header_field<int>(head[4], "r=");
  proc.seed = header_field<std::uint64_t>(head[5], "seed=");
  if (proc.n < 2 || proc.n > kMaxProcessVertices) throw ParseError(1, "n out of range");
  if (proc.r < 1 || proc.r > 0xFFFF) throw ParseError(1, "r out of range");

  const Step total = ColoredProcess::full_length(proc.n, proc.directed);
  proc.edges.reserve(total);
  std::vector<bool> seen(static_cast<std::size_t>(proc.n) * proc.n, false);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (proc.edges.size() == total) throw ParseError(lineno, "more steps than the full process length");
    auto tok = split_spaces(line);
    std::uint64_t a = 0, b = 0, c = 0;
    if (tok.size() != 3 || !parse_number(tok[0], a) || !parse_number(tok[1], b) || !parse_number(tok[2], c)) {
      throw ParseError(lineno, "expected \"<tail> <head> <color>\"");
    }
    if (a < 1 || a > proc.n || b < 1 || b > proc.n) throw ParseError(lineno, "vertex out of range");
    if (a == b) throw ParseError(lineno, "loop at vertex " + std::to_string(a));
    if (c < 1 || c > static_cast<std::uint64_t>(proc.r)) {
      throw ParseError(lineno, "color " + std::to_string(c) + " outside [1, " + std::to_string(proc.r) + "]");
    }
    const Vertex u = static_cast<Vertex>(a - 1), v = static_cast<Vertex>(b - 1);
    std::size_t key = proc.directed ? u * proc.n + v : std::min(u, v) * proc.n + std::max(u, v);
    if (seen[key]) throw ParseError(lineno, "duplicate edge " + std::to_string(a) + " " + std::to_string(b));
    seen[key] = true;
    proc.edges.push_back({u, v, static_cast<Color>(c)});
  }
  if (proc.edges.size() != total) {
    throw ParseError(lineno, "process has " + std::to_string(proc.edges.size()) + " steps, expected " +
                                 std::to_string(total));
  }
  return proc;
}

void write_process_file(const ColoredProcess& proc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_process(proc, out);
  if (!out) throw IoError("write to " + path.string() + " failed");
}

ColoredProcess read_process_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_process(in);
}

}  // namespace patternham
