#include "hwave/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace hwave::io {

static_assert(std::endian::native == std::endian::little, "HWSF files are written in host order (little-endian)");

std::string format_double(double v) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : out_(path, std::ios::binary), columns_(header.size()) {
  if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != columns_) throw std::invalid_argument("CsvWriter::row: column count mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    if (const auto* d = std::get_if<double>(&cells[i])) {
      out_ << format_double(*d);
    } else if (const auto* n = std::get_if<long long>(&cells[i])) {
      out_ << *n;
    } else {
      const auto& s = std::get<std::string>(cells[i]);
      if (s.find_first_of(",\"\n") == std::string::npos) {
        out_ << s;
      } else {
        out_ << '"';
        for (char c : s) out_ << (c == '"' ? "\"\"" : std::string(1, c));
        out_ << '"';
      }
    }
  }
  out_ << '\n';
  ++rows_;
}

namespace {

constexpr char kMagic[4] = {'H', 'W', 'S', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("read_field: truncated file");
  return v;
}

void put_doubles(std::ostream& os, const std::vector<double>& v) {
  put<std::uint64_t>(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_doubles(std::istream& is) {
  const auto n = get<std::uint64_t>(is);
  if (n > (std::uint64_t(1) << 32)) throw std::runtime_error("read_field: implausible array length");
  std::vector<double> v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw std::runtime_error("read_field: truncated file");
  return v;
}

}  // namespace

void write_field(const std::filesystem::path& path, const SpectralField& field) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_field: cannot open " + path.string());
  const auto& g = *field.grid();
  os.write(kMagic, 4);
  put(os, kVersion);
  put<std::uint8_t>(os, g.backend() == Backend::Heisenberg ? 0 : 1);
  put<std::int32_t>(os, g.dimension());
  put(os, g.plancherel_constant());
  put<std::uint8_t>(os, g.calibrated() ? 1 : 0);
  if (g.backend() == Backend::Heisenberg) {
    put_doubles(os, g.lambda_nodes());
    put_doubles(os, g.raw_weights());
    put<std::uint64_t>(os, g.hermite_count());
    for (const auto& k : g.hermite_set()) {
      for (int v : k.k) put<std::int32_t>(os, v);
    }
  } else {
    put<std::int32_t>(os, g.points_per_axis());
    put(os, g.half_width());
  }
  put<std::uint64_t>(os, field.size());
  os.write(reinterpret_cast<const char*>(field.coefficients().data()),
           static_cast<std::streamsize>(field.size() * sizeof(complex)));
  if (!os) throw std::runtime_error("write_field: write failed for " + path.string());
}

SpectralField read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_field: cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("read_field: not an HWSF file");
  if (get<std::uint32_t>(is) != kVersion) throw std::runtime_error("read_field: unsupported version");
  const auto backend = get<std::uint8_t>(is);
  const auto dim = get<std::int32_t>(is);
  const auto constant = get<double>(is);
  const bool calibrated = get<std::uint8_t>(is) != 0;
  GridPtr grid;
  if (backend == 0) {
    auto nodes = get_doubles(is);
    auto weights = get_doubles(is);
    const auto count = get<std::uint64_t>(is);
    if (count > 1'000'000) throw std::runtime_error("read_field: implausible Hermite count");
    std::vector<MultiIndex> set(count);
    for (auto& k : set) {
      k.k.resize(dim);
      for (auto& v : k.k) v = get<std::int32_t>(is);
    }
    grid = make_heisenberg_grid(dim, std::move(nodes), std::move(weights), constant, std::move(set), calibrated);
  } else if (backend == 1) {
    const auto points = get<std::int32_t>(is);
    const auto half = get<double>(is);
    grid = build_abelian_grid(dim, points, half);
    if (grid->plancherel_constant() != constant) grid = grid->with_plancherel_constant(constant);
  } else {
    throw std::runtime_error("read_field: unknown backend tag");
  }
  const auto n = get<std::uint64_t>(is);
  if (n != grid->coefficient_count()) throw std::runtime_error("read_field: coefficient count does not match the grid");
  std::vector<complex> coeffs(n);
  is.read(reinterpret_cast<char*>(coeffs.data()), static_cast<std::streamsize>(n * sizeof(complex)));
  if (!is) throw std::runtime_error("read_field: truncated file");
  return SpectralField(grid, std::move(coeffs));
}

std::string git_blob_hash(std::string_view bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("git_blob_hash: EVP context allocation failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 && EVP_DigestFinal_ex(ctx, md.data(), &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("git_blob_hash: digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string git_blob_hash_file(const std::filesystem::path& path) { return git_blob_hash(read_text(path)); }

}  // namespace hwave::io
