#include "qrev/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "qrev/hash.hpp"

namespace qrev {

namespace {

static_assert(std::endian::native == std::endian::little, "cache format assumes a little-endian host");

constexpr std::string_view kMagic{"QREVMDL\0", 8};

class Writer {
public:
    template <typename T>
    void put(const T& v) {
        static_assert(std::is_trivially_copyable_v<T>);
        buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void put_string(std::string_view s) {
        put<std::uint64_t>(s.size());
        buf_.append(s);
    }
    void put_doubles(const double* p, std::size_t n) {
        put<std::uint64_t>(n);
        buf_.append(reinterpret_cast<const char*>(p), n * sizeof(double));
    }
    void raw(std::string_view s) { buf_.append(s); }
    std::string take() { return std::move(buf_); }

private:
    std::string buf_;
};

class Reader {
public:
    explicit Reader(std::string_view data) : data_(data) {}

    template <typename T>
    T get() {
        T v;
        std::memcpy(&v, take(sizeof(T)), sizeof(T));
        return v;
    }
    std::string get_string() {
        const auto n = get<std::uint64_t>();
        return std::string(take(n), n);
    }
    std::vector<double> get_doubles() {
        const auto n = get<std::uint64_t>();
        std::vector<double> v(n);
        if (n) std::memcpy(v.data(), take(n * sizeof(double)), n * sizeof(double));
        return v;
    }
    std::string_view raw(std::size_t n) { return {take(n), n}; }
    [[nodiscard]] bool done() const { return pos_ == data_.size(); }

private:
    const char* take(std::size_t n) {
        if (n > data_.size() - pos_) throw ConfigError("model cache is truncated or corrupt");
        const char* p = data_.data() + pos_;
        pos_ += n;
        return p;
    }
    std::string_view data_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const QuantizedModel& m) {
    Writer w;
    w.raw(kMagic);
    w.put<std::uint32_t>(kModelFormatVersion);
    w.put<std::uint32_t>(m.kind == ModelKind::ermt ? 1 : 0);
    w.put<double>(m.params.hbar);
    w.put<double>(m.params.e_cutoff);
    w.put<double>(m.params.x_ref);
    w.put_string(to_string(m.params.sector));
    w.put<double>(m.params.window.e_center);
    w.put<double>(m.params.window.half_width);
    w.put<double>(m.params.window.edge_margin);
    w.put<double>(m.params.window.cutoff_ratio);
    w.put<std::uint64_t>(m.params.basis_cap);
    w.put<std::uint64_t>(m.basis_dim);
    w.put<std::uint64_t>(m.window.first);
    w.put<std::uint64_t>(m.window.last);
    w.put<double>(m.mean_spacing);
    w.put_doubles(m.energies.data(), static_cast<std::size_t>(m.energies.size()));
    w.put_doubles(m.b_matrix.data(), static_cast<std::size_t>(m.b_matrix.size()));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(m.eigenvectors.rows()));
    w.put_doubles(m.eigenvectors.data(), static_cast<std::size_t>(m.eigenvectors.size()));
    w.put<std::uint64_t>(m.ermt_seed);
    w.put_string(m.parent_hash);
    return w.take();
}

QuantizedModel deserialize_model(std::string_view bytes) {
    Reader r(bytes);
    if (bytes.size() < kMagic.size() || r.raw(kMagic.size()) != kMagic) {
        throw ConfigError("not a model cache file (bad magic)");
    }
    const auto version = r.get<std::uint32_t>();
    if (version != kModelFormatVersion) {
        throw ConfigError("model cache format version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kModelFormatVersion) + "); rebuild the cache");
    }
    QuantizedModel m;
    m.kind = r.get<std::uint32_t>() == 1 ? ModelKind::ermt : ModelKind::physical_2dw;
    m.params.hbar = r.get<double>();
    m.params.e_cutoff = r.get<double>();
    m.params.x_ref = r.get<double>();
    m.params.sector = sector_from_string(r.get_string());
    m.params.window.e_center = r.get<double>();
    m.params.window.half_width = r.get<double>();
    m.params.window.edge_margin = r.get<double>();
    m.params.window.cutoff_ratio = r.get<double>();
    m.params.basis_cap = r.get<std::uint64_t>();
    m.basis_dim = r.get<std::uint64_t>();
    m.window.first = r.get<std::uint64_t>();
    m.window.last = r.get<std::uint64_t>();
    m.mean_spacing = r.get<double>();

    const auto energies = r.get_doubles();
    m.energies = Eigen::Map<const Eigen::VectorXd>(energies.data(), static_cast<Eigen::Index>(energies.size()));
    const auto n = static_cast<Eigen::Index>(m.window.size());
    const auto b = r.get_doubles();
    if (m.window.last >= energies.size() || b.size() != static_cast<std::size_t>(n * n)) {
        throw ConfigError("model cache is inconsistent (window / B shape)");
    }
    m.b_matrix = Eigen::Map<const Eigen::MatrixXd>(b.data(), n, n);
    const auto rows = static_cast<Eigen::Index>(r.get<std::uint64_t>());
    const auto v = r.get_doubles();
    if (v.size() != static_cast<std::size_t>(rows * n)) throw ConfigError("model cache is inconsistent (eigenvectors)");
    m.eigenvectors = Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, n);
    m.ermt_seed = r.get<std::uint64_t>();
    m.parent_hash = r.get_string();
    if (!r.done()) throw ConfigError("model cache has trailing bytes");
    return m;
}

void save_model(const QuantizedModel& model, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    const std::string bytes = serialize_model(model);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("cannot write model cache " + path.string());
}

QuantizedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("model cache " + path.string() +
                          " not found; create it first with `qrev build --config ...`"
                          " (or `qrev ermt-derive` for ERMT models)");
    }
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return deserialize_model(bytes);
}

std::string model_hash(const QuantizedModel& model) { return sha256_hex(serialize_model(model)); }

}  // namespace qrev
