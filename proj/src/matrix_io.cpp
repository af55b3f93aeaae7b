#include "ncorb/matrix_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace ncorb {

namespace {
constexpr const char* kHeader = "ncorb-matrix 1";
}

void write_matrix(std::ostream& out, const Matrix& m) {
    out << kHeader << "\n" << m.rows() << " " << m.cols() << "\n";
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << " ";
            out << m(i, j).real() << " " << m(i, j).imag();
        }
        out << "\n";
    }
}

Matrix read_matrix(std::istream& in) {
    std::string header;
    if (!std::getline(in, header) || header != kHeader)
        throw StructuralError("matrix file does not start with '" + std::string(kHeader) + "'");
    Eigen::Index rows = -1, cols = -1;
    {
        std::string line;
        if (!std::getline(in, line)) throw StructuralError("matrix file has no dimension line");
        std::istringstream dims(line);
        std::string extra;
        if (!(dims >> rows >> cols) || rows < 0 || cols < 0 || (dims >> extra))
            throw StructuralError("malformed matrix dimension line: '" + line + "'");
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        std::string line;
        if (!std::getline(in, line)) {
            std::ostringstream msg;
            msg << "matrix file ends before row " << i;
            throw StructuralError(msg.str());
        }
        std::istringstream row(line);
        for (Eigen::Index j = 0; j < cols; ++j) {
            double re = 0.0, im = 0.0;
            if (!(row >> re >> im)) {
                std::ostringstream msg;
                msg << "row " << i << " is short or malformed: '" << line << "'";
                throw StructuralError(msg.str());
            }
            m(i, j) = Complex(re, im);
        }
        std::string extra;
        if (row >> extra) {
            std::ostringstream msg;
            msg << "row " << i << " has trailing entries: '" << line << "'";
            throw StructuralError(msg.str());
        }
    }
    return m;
}

void save_matrix(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw StructuralError("cannot open '" + path + "' for writing");
    write_matrix(out, m);
    if (!out) throw StructuralError("failed while writing '" + path + "'");
}

Matrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StructuralError("cannot open '" + path + "' for reading");
    return read_matrix(in);
}

}  // namespace ncorb
