#include "chd/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <sstream>

namespace chd {

const char* const kCsvSchemaLine = "# chd-sharp v1";
const char* const kCsvColumnsLine =
    "t,energy_E,gl_energy,discrepancy_pos,G_quantity,mean_phi,mean_mu,mean_theta_sigma,"
    "L2_phi_dev,L2_theta,H1_mu,H1_theta,L2_v,L2_p,tv_w,energy_residual,sigma_jump,max_abs_phi";

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_row(const DiagnosticsRecord& r) {
    const double cols[] = {r.t,        r.energy_E,  r.gl_energy, r.discrepancy_pos,
                           r.G_quantity, r.mean_phi, r.mean_mu,  r.mean_theta_sigma,
                           r.L2_phi_dev, r.L2_theta, r.H1_mu,    r.H1_theta,
                           r.L2_v,       r.L2_p,     r.tv_w,     r.energy_residual,
                           r.sigma_jump, r.max_abs_phi};
    std::string out;
    for (std::size_t k = 0; k < std::size(cols); ++k) {
        if (k) out += ',';
        out += format_g17(cols[k]);
    }
    return out;
}

CsvWriter::CsvWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open CSV output file: " + path);
    out_ << kCsvSchemaLine << "\n" << kCsvColumnsLine << "\n";
}

void CsvWriter::write_record(const DiagnosticsRecord& rec) {
    out_ << csv_row(rec) << "\n";
    if (!out_) throw IoError("write failed on CSV output file: " + path_);
}

void CsvWriter::write_comment(const std::string& line) {
    out_ << "# " << line << "\n";
    if (!out_) throw IoError("write failed on CSV output file: " + path_);
}

namespace {

void write_le_doubles(std::ostream& out, const double* src, std::size_t count) {
    static_assert(sizeof(double) == 8);
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(src), static_cast<std::streamsize>(8 * count));
    } else {
        for (std::size_t k = 0; k < count; ++k) {
            unsigned char b[8];
            std::memcpy(b, &src[k], 8);
            std::swap(b[0], b[7]);
            std::swap(b[1], b[6]);
            std::swap(b[2], b[5]);
            std::swap(b[3], b[4]);
            out.write(reinterpret_cast<const char*>(b), 8);
        }
    }
}

void read_le_doubles(std::istream& in, double* dst, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(8 * count));
    } else {
        for (std::size_t k = 0; k < count; ++k) {
            unsigned char b[8];
            in.read(reinterpret_cast<char*>(b), 8);
            std::swap(b[0], b[7]);
            std::swap(b[1], b[6]);
            std::swap(b[2], b[5]);
            std::swap(b[3], b[4]);
            std::memcpy(&dst[k], b, 8);
        }
    }
}

}  // namespace

void write_snapshot(const std::string& path, const ScalarField& f, const std::string& name,
                    double t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open snapshot file: " + path);
    const GridSpec& g = f.grid;
    out << "# chd-snapshot v1\n";
    out << "field " << name << "\n";
    out << "dim " << g.dim << "\n";
    out << "nx " << g.nx << " ny " << g.ny << "\n";
    out << "lx " << format_g17(g.lx) << " ly " << format_g17(g.ly) << "\n";
    out << "t " << format_g17(t) << "\n";
    out << "data float64 little-endian row-major " << g.num_cells() << "\n";
    write_le_doubles(out, f.data.data(), static_cast<std::size_t>(g.num_cells()));
    if (!out) throw IoError("write failed on snapshot file: " + path);
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open snapshot file: " + path);

    auto next_line = [&in, &path]() {
        std::string line;
        if (!std::getline(in, line)) throw IoError("truncated snapshot header: " + path);
        return line;
    };

    if (next_line() != "# chd-snapshot v1") throw IoError("bad snapshot magic in " + path);
    Snapshot snap;
    int dim = 0, nx = 0, ny = 0;
    double lx = 0, ly = 0;
    long count = 0;
    {
        std::istringstream ls(next_line());
        std::string key;
        ls >> key >> snap.name;
        if (key != "field") throw IoError("bad snapshot header (field) in " + path);
    }
    {
        std::istringstream ls(next_line());
        std::string key;
        ls >> key >> dim;
        if (key != "dim") throw IoError("bad snapshot header (dim) in " + path);
    }
    {
        std::istringstream ls(next_line());
        std::string k1, k2;
        ls >> k1 >> nx >> k2 >> ny;
        if (k1 != "nx" || k2 != "ny") throw IoError("bad snapshot header (nx/ny) in " + path);
    }
    {
        std::istringstream ls(next_line());
        std::string k1, k2;
        ls >> k1 >> lx >> k2 >> ly;
        if (k1 != "lx" || k2 != "ly") throw IoError("bad snapshot header (lx/ly) in " + path);
    }
    {
        std::istringstream ls(next_line());
        std::string key;
        ls >> key >> snap.t;
        if (key != "t") throw IoError("bad snapshot header (t) in " + path);
    }
    {
        std::istringstream ls(next_line());
        std::string k, type, endian, order;
        ls >> k >> type >> endian >> order >> count;
        if (k != "data" || type != "float64" || endian != "little-endian" ||
            order != "row-major")
            throw IoError("bad snapshot data descriptor in " + path);
    }

    GridSpec g = dim == 2 ? GridSpec::make_2d(nx, ny, lx, ly) : GridSpec::make_1d(nx, lx);
    if (count != g.num_cells()) throw IoError("snapshot count mismatch in " + path);
    snap.field = ScalarField(g);
    read_le_doubles(in, snap.field.data.data(), static_cast<std::size_t>(count));
    if (!in) throw IoError("truncated snapshot payload: " + path);
    return snap;
}

}  // namespace chd
