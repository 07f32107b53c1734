#include "cosen/checkpoint.hpp"

#include "cosen/error.hpp"

#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace cosen {
namespace {

void write_row(std::ostream& out, const double* values, Eigen::Index count) {
    for (Eigen::Index i = 0; i < count; ++i) {
        if (i > 0) out << ' ';
        out << std::hexfloat << values[i];
    }
    out << std::defaultfloat << '\n';
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::string word() {
        std::string w;
        if (!(in_ >> w)) fail("unexpected end of checkpoint");
        return w;
    }

    void expect(const std::string& keyword) {
        const std::string w = word();
        if (w != keyword) fail("expected '" + keyword + "', found '" + w + "'");
    }

    long integer() {
        const std::string w = word();
        char* end = nullptr;
        const long v = std::strtol(w.c_str(), &end, 10);
        if (end == w.c_str() || *end != '\0') fail("expected an integer, found '" + w + "'");
        return v;
    }

    double real() {
        const std::string w = word();
        char* end = nullptr;
        const double v = std::strtod(w.c_str(), &end);
        if (end == w.c_str() || *end != '\0') fail("expected a number, found '" + w + "'");
        return v;
    }

    [[noreturn]] void fail(const std::string& message) {
        const auto pos = in_.tellg();
        throw ParseError("checkpoint: " + message, pos < 0 ? 0 : static_cast<std::size_t>(pos));
    }

private:
    std::istream& in_;
};

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
    const Network& net = checkpoint.network;
    out << kCheckpointMagic << '\n';
    out << "format_version " << kCheckpointFormatVersion << '\n';
    out << "layers " << net.n_layers() << '\n';
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        const Layer& layer = net.layers()[l];
        out << "layer " << l << ' ' << layer.weights.cols() << ' ' << layer.weights.rows() << ' '
            << to_string(layer.activation) << '\n';
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            write_row(out, layer.weights.row(r).data(), layer.weights.cols());
        }
        write_row(out, layer.bias.data(), layer.bias.size());
    }
    const Matrix& xi = checkpoint.costs.entries();
    out << "costs " << xi.rows() << '\n';
    for (Eigen::Index r = 0; r < xi.rows(); ++r) write_row(out, xi.row(r).data(), xi.cols());
}

Checkpoint read_checkpoint(std::istream& in) {
    Reader reader(in);
    std::string magic;
    if (!std::getline(in, magic) || magic != kCheckpointMagic) {
        throw ParseError("checkpoint: bad magic header", 0);
    }
    reader.expect("format_version");
    const long version = reader.integer();
    if (version != kCheckpointFormatVersion) {
        reader.fail("unsupported format version " + std::to_string(version));
    }
    reader.expect("layers");
    const long n_layers = reader.integer();
    if (n_layers <= 0) reader.fail("layer count must be positive");

    std::vector<Layer> layers;
    for (long l = 0; l < n_layers; ++l) {
        reader.expect("layer");
        if (reader.integer() != l) reader.fail("layers out of order");
        const long in_dim = reader.integer();
        const long out_dim = reader.integer();
        if (in_dim <= 0 || out_dim <= 0) reader.fail("layer dimensions must be positive");
        Layer layer;
        try {
            layer.activation = parse_activation(reader.word());
        } catch (const ConfigError& e) {
            reader.fail(e.what());
        }
        layer.weights.resize(out_dim, in_dim);
        for (long r = 0; r < out_dim; ++r) {
            for (long c = 0; c < in_dim; ++c) layer.weights(r, c) = reader.real();
        }
        layer.bias.resize(out_dim);
        for (long r = 0; r < out_dim; ++r) layer.bias[r] = reader.real();
        layers.push_back(std::move(layer));
    }
    reader.expect("costs");
    const long n = reader.integer();
    if (n <= 0) reader.fail("cost matrix size must be positive");
    Matrix xi(n, n);
    for (long r = 0; r < n; ++r) {
        for (long c = 0; c < n; ++c) xi(r, c) = reader.real();
    }
    Network net(std::move(layers));
    if (static_cast<long>(net.output_dim()) != n) reader.fail("cost matrix size does not match network output");
    return Checkpoint{std::move(net), CostMatrix(std::move(xi))};
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
    write_checkpoint(out, checkpoint);
    if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open checkpoint '" + path.string() + "'");
    return read_checkpoint(in);
}

}  // namespace cosen
