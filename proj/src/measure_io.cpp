#include "wavecone/measure_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace wavecone {

namespace {

static_assert(std::endian::native == std::endian::little, "binary payloads assume a little-endian host");

// Next non-blank, non-comment line; false at end of stream.
bool next_line(std::istream& in, std::string& line, int& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
    return true;
  }
  return false;
}

[[noreturn]] void fail(int lineno, const std::string& what) {
  throw InputError("line " + std::to_string(lineno) + ": " + what);
}

std::string expect_line(std::istream& in, int& lineno, const char* what) {
  std::string line;
  if (!next_line(in, line, lineno)) fail(lineno, std::string("unexpected end of file, expected ") + what);
  return line;
}

// "key value" header line.
std::string keyed(std::istream& in, int& lineno, const std::string& key) {
  const std::string line = expect_line(in, lineno, key.c_str());
  std::istringstream ss(line);
  std::string k, v, extra;
  ss >> k >> v;
  if (k != key || v.empty() || (ss >> extra)) fail(lineno, "expected '" + key + " <value>'");
  return v;
}

long keyed_int(std::istream& in, int& lineno, const std::string& key, long lo, long hi) {
  const std::string v = keyed(in, lineno, key);
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size() || x < lo || x > hi) throw std::out_of_range(v);
    return x;
  } catch (const std::exception&) {
    fail(lineno, "'" + key + "' must be an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

double keyed_double(std::istream& in, int& lineno, const std::string& key) {
  const std::string v = keyed(in, lineno, key);
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail(lineno, "'" + key + "' must be a number");
  }
}

std::vector<double> read_numbers(std::istream& in, int& lineno, std::size_t count, PayloadFormat fmt) {
  std::vector<double> out(count);
  if (fmt == PayloadFormat::binary) {
    std::string marker;
    if (!std::getline(in, marker) || marker != "data") fail(lineno + 1, "expected 'data' before binary payload");
    ++lineno;
    in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double)) fail(lineno, "truncated binary payload");
    return out;
  }
  std::size_t got = 0;
  std::string line;
  while (got < count && next_line(in, line, lineno)) {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      if (got == count) fail(lineno, "more values than the header announces");
      try {
        std::size_t used = 0;
        out[got] = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        fail(lineno, "'" + tok + "' is not a number");
      }
      ++got;
    }
  }
  if (got != count) fail(lineno, "expected " + std::to_string(count) + " values, found " + std::to_string(got));
  if (next_line(in, line, lineno)) fail(lineno, "trailing content after payload");
  return out;
}

void write_numbers(std::ostream& out, const double* x, std::size_t count, std::size_t per_line, PayloadFormat fmt) {
  if (fmt == PayloadFormat::binary) {
    out << "data\n";
    out.write(reinterpret_cast<const char*>(x), static_cast<std::streamsize>(count * sizeof(double)));
    return;
  }
  for (std::size_t i = 0; i < count; ++i) {
    out << x[i] << ((i + 1) % per_line == 0 ? '\n' : ' ');
  }
}

}  // namespace

void write_measure(std::ostream& out, const DiscreteMeasure& mu, PayloadFormat format) {
  out << std::setprecision(17);
  out << "wavecone-measure 1\n";
  out << "kind " << (mu.kind() == MeasureKind::grid ? "grid" : "atomic") << "\n";
  out << "format " << (format == PayloadFormat::text ? "text" : "binary") << "\n";
  out << "d " << mu.d() << "\nm " << mu.m() << "\n";
  if (mu.kind() == MeasureKind::grid) {
    out << "N " << mu.N() << "\n";
    write_numbers(out, mu.values().data(), mu.values().size(), mu.m(), format);
    return;
  }
  out << "atoms " << mu.atoms().size() << "\n";
  out << "spacing " << mu.spacing() << "\n";
  std::vector<double> flat;
  flat.reserve(mu.atoms().size() * (mu.d() + mu.m()));
  for (const Atom& a : mu.atoms()) {
    flat.insert(flat.end(), a.position.data(), a.position.data() + mu.d());
    flat.insert(flat.end(), a.weight.data(), a.weight.data() + mu.m());
  }
  write_numbers(out, flat.data(), flat.size(), mu.d() + mu.m(), format);
}

DiscreteMeasure read_measure(std::istream& in) {
  int lineno = 0;
  if (expect_line(in, lineno, "magic") != "wavecone-measure 1") fail(lineno, "expected 'wavecone-measure 1'");
  const std::string kind = keyed(in, lineno, "kind");
  if (kind != "grid" && kind != "atomic") fail(lineno, "kind must be grid or atomic");
  const std::string fmt_s = keyed(in, lineno, "format");
  if (fmt_s != "text" && fmt_s != "binary") fail(lineno, "format must be text or binary");
  const PayloadFormat fmt = fmt_s == "text" ? PayloadFormat::text : PayloadFormat::binary;
  const int d = static_cast<int>(keyed_int(in, lineno, "d", 1, 6));
  const int m = static_cast<int>(keyed_int(in, lineno, "m", 1, 4096));
  if (kind == "grid") {
    const int N = static_cast<int>(keyed_int(in, lineno, "N", 2, 1 << 14));
    long cells = 1;
    for (int i = 0; i < d; ++i) {
      cells *= N;
      if (cells > (1L << 31)) fail(lineno, "grid too large");
    }
    auto values = read_numbers(in, lineno, static_cast<std::size_t>(cells) * m, fmt);
    return DiscreteMeasure::grid(d, m, N, std::move(values));
  }
  const long count = keyed_int(in, lineno, "atoms", 0, 1L << 28);
  const double spacing = keyed_double(in, lineno, "spacing");
  const auto flat = read_numbers(in, lineno, static_cast<std::size_t>(count) * (d + m), fmt);
  std::vector<Atom> atoms(count);
  for (long i = 0; i < count; ++i) {
    const double* p = flat.data() + i * (d + m);
    atoms[i].position = Eigen::Map<const Vector>(p, d);
    atoms[i].weight = Eigen::Map<const Vector>(p + d, m);
  }
  return DiscreteMeasure::atomic(d, m, std::move(atoms), spacing);
}

void save_measure(const std::string& path, const DiscreteMeasure& mu, PayloadFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write measure file '" + path + "'");
  write_measure(out, mu, format);
  if (!out) throw InputError("error writing measure file '" + path + "'");
}

DiscreteMeasure load_measure(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open measure file '" + path + "'");
  try {
    return read_measure(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_polyhedral_set(std::ostream& out, const PolyhedralSet& set) {
  out << std::setprecision(17);
  out << "wavecone-polyset 1\n";
  out << "d " << set.d << "\ndim " << set.l << "\nsimplices " << set.simplices.size() << "\n";
  for (const Matrix& S : set.simplices) {
    for (Eigen::Index v = 0; v < S.cols(); ++v) {
      for (Eigen::Index i = 0; i < S.rows(); ++i) out << S(i, v) << (i + 1 == S.rows() ? '\n' : ' ');
    }
  }
}

PolyhedralSet read_polyhedral_set(std::istream& in) {
  int lineno = 0;
  if (expect_line(in, lineno, "magic") != "wavecone-polyset 1") fail(lineno, "expected 'wavecone-polyset 1'");
  PolyhedralSet set;
  set.d = static_cast<int>(keyed_int(in, lineno, "d", 1, 64));
  set.l = static_cast<int>(keyed_int(in, lineno, "dim", 0, set.d));
  const long count = keyed_int(in, lineno, "simplices", 0, 1L << 24);
  const auto flat = read_numbers(in, lineno, static_cast<std::size_t>(count) * (set.l + 1) * set.d,
                                 PayloadFormat::text);
  for (long s = 0; s < count; ++s) {
    Matrix S(set.d, set.l + 1);
    for (int v = 0; v <= set.l; ++v) {
      for (int i = 0; i < set.d; ++i) S(i, v) = flat[(s * (set.l + 1) + v) * set.d + i];
    }
    set.simplices.push_back(std::move(S));
  }
  set.validate();
  return set;
}

PolyhedralSet load_polyhedral_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open polyhedral set file '" + path + "'");
  try {
    return read_polyhedral_set(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace wavecone
