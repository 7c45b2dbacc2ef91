#include "svt/matrix_market.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace svt {

MatrixMarketError::MatrixMarketError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

enum class Layout { coordinate, array };
enum class Field { real, integer, pattern };
enum class Symmetry { general, symmetric, skew };

struct Header {
    Layout layout;
    Field field;
    Symmetry symmetry;
};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

Header parse_header(const std::string& line) {
    std::istringstream ss(line);
    std::string banner, object, layout, field, symmetry;
    ss >> banner >> object >> layout >> field >> symmetry;
    if (lower(banner) != "%%matrixmarket" || lower(object) != "matrix")
        throw MatrixMarketError(1, "malformed header");

    Header h{};
    layout = lower(layout);
    if (layout == "coordinate") h.layout = Layout::coordinate;
    else if (layout == "array") h.layout = Layout::array;
    else throw MatrixMarketError(1, "malformed header: unknown format '" + layout + "'");

    field = lower(field);
    if (field == "real" || field == "double") h.field = Field::real;
    else if (field == "integer") h.field = Field::integer;
    else if (field == "pattern") h.field = Field::pattern;
    else if (field == "complex") throw MatrixMarketError(1, "complex field is not supported");
    else throw MatrixMarketError(1, "malformed header: unknown field '" + field + "'");

    symmetry = lower(symmetry);
    if (symmetry == "general") h.symmetry = Symmetry::general;
    else if (symmetry == "symmetric") h.symmetry = Symmetry::symmetric;
    else if (symmetry == "skew-symmetric") h.symmetry = Symmetry::skew;
    else if (symmetry == "hermitian") throw MatrixMarketError(1, "hermitian symmetry is not supported");
    else throw MatrixMarketError(1, "malformed header: unknown symmetry '" + symmetry + "'");

    if (h.layout == Layout::array && h.field == Field::pattern)
        throw MatrixMarketError(1, "malformed header: pattern field requires coordinate format");
    return h;
}

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // Next non-comment, non-blank line.
    bool next(std::string& line) {
        while (std::getline(in_, line)) {
            ++lineno_;
            auto pos = line.find_first_not_of(" \t\r");
            if (pos == std::string::npos || line[pos] == '%') continue;
            return true;
        }
        return false;
    }

    bool raw(std::string& line) {
        if (!std::getline(in_, line)) return false;
        ++lineno_;
        return true;
    }

    std::size_t lineno() const { return lineno_; }

private:
    std::istream& in_;
    std::size_t lineno_ = 0;
};

double parse_value(const std::string& tok, std::size_t lineno) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw MatrixMarketError(lineno, "invalid number '" + tok + "'");
    return v;
}

std::size_t parse_index(const std::string& tok, std::size_t lineno) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 0)
        throw MatrixMarketError(lineno, "invalid index '" + tok + "'");
    return static_cast<std::size_t>(v);
}

std::vector<std::string> tokens(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    std::string t;
    while (ss >> t) out.push_back(t);
    return out;
}

struct Parsed {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Triplet> entries;
};

Parsed parse(std::istream& in) {
    LineReader reader(in);
    std::string line;
    if (!reader.raw(line)) throw MatrixMarketError(1, "malformed header: empty input");
    Header h = parse_header(line);

    if (!reader.next(line)) throw MatrixMarketError(reader.lineno(), "missing size line");
    auto size_tok = tokens(line);
    const std::size_t expected = h.layout == Layout::coordinate ? 3 : 2;
    if (size_tok.size() != expected) throw MatrixMarketError(reader.lineno(), "malformed size line");

    Parsed p;
    p.rows = parse_index(size_tok[0], reader.lineno());
    p.cols = parse_index(size_tok[1], reader.lineno());
    if (h.symmetry != Symmetry::general && p.rows != p.cols)
        throw MatrixMarketError(reader.lineno(), "symmetric storage requires a square matrix");

    auto add = [&](std::size_t i, std::size_t j, double v) {
        p.entries.push_back({i, j, v});
        if (i != j && h.symmetry == Symmetry::symmetric) p.entries.push_back({j, i, v});
        if (i != j && h.symmetry == Symmetry::skew) p.entries.push_back({j, i, -v});
    };

    if (h.layout == Layout::coordinate) {
        std::size_t nnz = parse_index(size_tok[2], reader.lineno());
        p.entries.reserve(h.symmetry == Symmetry::general ? nnz : 2 * nnz);
        const std::size_t want = h.field == Field::pattern ? 2 : 3;
        for (std::size_t e = 0; e < nnz; ++e) {
            if (!reader.next(line)) throw MatrixMarketError(reader.lineno(), "unexpected end of file");
            auto t = tokens(line);
            if (t.size() != want) throw MatrixMarketError(reader.lineno(), "malformed entry");
            std::size_t i = parse_index(t[0], reader.lineno());
            std::size_t j = parse_index(t[1], reader.lineno());
            if (i < 1 || j < 1 || i > p.rows || j > p.cols)
                throw MatrixMarketError(reader.lineno(), "index out of bounds");
            double v = h.field == Field::pattern ? 1.0 : parse_value(t[2], reader.lineno());
            if (h.symmetry == Symmetry::skew && i == j)
                throw MatrixMarketError(reader.lineno(), "diagonal entry in skew-symmetric matrix");
            add(i - 1, j - 1, v);
        }
    } else {
        for (std::size_t j = 0; j < p.cols; ++j) {
            std::size_t first = 0;
            if (h.symmetry == Symmetry::symmetric) first = j;
            if (h.symmetry == Symmetry::skew) first = j + 1;
            for (std::size_t i = first; i < p.rows; ++i) {
                if (!reader.next(line)) throw MatrixMarketError(reader.lineno(), "unexpected end of file");
                auto t = tokens(line);
                if (t.size() != 1) throw MatrixMarketError(reader.lineno(), "malformed entry");
                double v = parse_value(t[0], reader.lineno());
                if (v != 0.0) add(i, j, v);
            }
        }
    }
    return p;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot write " + path.string());
    return out;
}

}  // namespace

SparseMatrix mm_read(std::istream& in) {
    Parsed p = parse(in);
    return SparseMatrix(p.rows, p.cols, std::move(p.entries));
}

SparseMatrix mm_read(const std::filesystem::path& path) {
    auto in = open_in(path);
    return mm_read(in);
}

DenseMatrix mm_read_dense(std::istream& in) {
    Parsed p = parse(in);
    DenseMatrix d(p.rows, p.cols);
    for (const auto& t : p.entries) d(t.row, t.col) += t.value;
    return d;
}

DenseMatrix mm_read_dense(const std::filesystem::path& path) {
    auto in = open_in(path);
    return mm_read_dense(in);
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

void mm_write(std::ostream& out, const SparseMatrix& a) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
    for (const auto& t : a.triplets())
        out << t.row + 1 << ' ' << t.col + 1 << ' ' << format_double(t.value) << '\n';
    if (!out) throw std::ios_base::failure("write failed");
}

void mm_write(const std::filesystem::path& path, const SparseMatrix& a) {
    auto out = open_out(path);
    mm_write(out, a);
}

void mm_write_dense(std::ostream& out, const DenseMatrix& a) {
    out << "%%MatrixMarket matrix array real general\n";
    out << a.rows() << ' ' << a.cols() << '\n';
    for (double v : a.values()) out << format_double(v) << '\n';
    if (!out) throw std::ios_base::failure("write failed");
}

void mm_write_dense(const std::filesystem::path& path, const DenseMatrix& a) {
    auto out = open_out(path);
    mm_write_dense(out, a);
}

}  // namespace svt
