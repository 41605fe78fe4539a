#include "dtc/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dtc::dataio {

namespace {

constexpr char kMagic[8] = {'D', 'T', 'C', 'K', 'P', 'T', '1', '\n'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a64(const std::vector<char>& bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (char c : bytes) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ull;
    }
    return hash;
}

class Writer {
public:
    template <typename T>
    void put(T value) {
        static_assert(std::is_trivially_copyable_v<T>);
        const std::size_t offset = buffer_.size();
        buffer_.resize(offset + sizeof(T));
        std::memcpy(buffer_.data() + offset, &value, sizeof(T));
    }

    void put_string(const std::string& s) {
        put(static_cast<std::uint32_t>(s.size()));
        buffer_.insert(buffer_.end(), s.begin(), s.end());
    }

    void put_doubles(const std::vector<double>& values) {
        const std::size_t offset = buffer_.size();
        buffer_.resize(offset + values.size() * sizeof(double));
        std::memcpy(buffer_.data() + offset, values.data(), values.size() * sizeof(double));
    }

    void put_tensor(const std::string& name, const Tensor& t) {
        put_string(name);
        put(static_cast<std::uint32_t>(t.ndim()));
        for (std::size_t dim : t.shape()) put(static_cast<std::uint64_t>(dim));
        const std::size_t offset = buffer_.size();
        buffer_.resize(offset + t.size() * sizeof(double));
        std::memcpy(buffer_.data() + offset, t.data(), t.size() * sizeof(double));
    }

    const std::vector<char>& bytes() const { return buffer_; }

private:
    std::vector<char> buffer_;
};

class Reader {
public:
    Reader(std::vector<char> bytes, std::string path)
        : buffer_(std::move(bytes)), path_(std::move(path)) {}

    template <typename T>
    T get() {
        static_assert(std::is_trivially_copyable_v<T>);
        require(sizeof(T));
        T value;
        std::memcpy(&value, buffer_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::string get_string() {
        const auto len = get<std::uint32_t>();
        require(len);
        std::string s(buffer_.data() + pos_, len);
        pos_ += len;
        return s;
    }

    std::vector<double> get_doubles(std::size_t count) {
        require(count * sizeof(double));
        std::vector<double> values(count);
        std::memcpy(values.data(), buffer_.data() + pos_, count * sizeof(double));
        pos_ += count * sizeof(double);
        return values;
    }

    Tensor get_tensor(const std::string& expected_name) {
        const std::string name = get_string();
        if (name != expected_name) {
            fail("unexpected tensor '" + name + "', expected '" + expected_name + "'");
        }
        const auto ndim = get<std::uint32_t>();
        std::vector<std::size_t> shape;
        std::size_t count = 1;
        for (std::uint32_t d = 0; d < ndim; ++d) {
            shape.push_back(static_cast<std::size_t>(get<std::uint64_t>()));
            count *= shape.back();
        }
        return Tensor(std::move(shape), get_doubles(count));
    }

    bool exhausted() const { return pos_ == buffer_.size(); }

    [[noreturn]] void fail(const std::string& what) const {
        throw std::runtime_error("checkpoint " + path_ + ": " + what);
    }

private:
    void require(std::size_t bytes) {
        if (pos_ + bytes > buffer_.size()) fail("truncated file");
    }

    std::vector<char> buffer_;
    std::string path_;
    std::size_t pos_ = 0;
};

void append_model(Writer& w, const tae::TaeModel& model) {
    const tae::TaeConfig& cfg = model.config;
    w.put(static_cast<std::uint64_t>(cfg.input_length));
    w.put(static_cast<std::uint64_t>(cfg.input_channels));
    w.put(static_cast<std::uint64_t>(cfg.n_filters));
    w.put(static_cast<std::uint64_t>(cfg.kernel_size));
    w.put(static_cast<std::uint64_t>(cfg.pool_size));
    w.put(static_cast<std::uint64_t>(cfg.lstm_units.size()));
    for (std::size_t units : cfg.lstm_units) w.put(static_cast<std::uint64_t>(units));
    w.put(cfg.leaky_slope);
    w.put(static_cast<std::uint8_t>(model.pretrained ? 1 : 0));

    w.put_tensor("conv.kernels", model.conv_kernels.value);
    w.put_tensor("conv.bias", model.conv_bias.value);
    for (std::size_t i = 0; i < model.lstms.size(); ++i) {
        const std::string prefix = "lstm" + std::to_string(i);
        const BiLstmParams& lstm = model.lstms[i];
        w.put_tensor(prefix + ".fwd.w_in", lstm.fwd.w_in.value);
        w.put_tensor(prefix + ".fwd.w_rec", lstm.fwd.w_rec.value);
        w.put_tensor(prefix + ".fwd.bias", lstm.fwd.bias.value);
        w.put_tensor(prefix + ".bwd.w_in", lstm.bwd.w_in.value);
        w.put_tensor(prefix + ".bwd.w_rec", lstm.bwd.w_rec.value);
        w.put_tensor(prefix + ".bwd.bias", lstm.bwd.bias.value);
    }
    w.put_tensor("deconv.kernels", model.deconv_kernels.value);
    w.put_tensor("deconv.bias", model.deconv_bias.value);
}

tae::TaeModel read_model(Reader& r) {
    tae::TaeConfig cfg;
    cfg.input_length = static_cast<std::size_t>(r.get<std::uint64_t>());
    cfg.input_channels = static_cast<std::size_t>(r.get<std::uint64_t>());
    cfg.n_filters = static_cast<std::size_t>(r.get<std::uint64_t>());
    cfg.kernel_size = static_cast<std::size_t>(r.get<std::uint64_t>());
    cfg.pool_size = static_cast<std::size_t>(r.get<std::uint64_t>());
    const auto n_lstms = static_cast<std::size_t>(r.get<std::uint64_t>());
    cfg.lstm_units.clear();
    for (std::size_t i = 0; i < n_lstms; ++i) {
        cfg.lstm_units.push_back(static_cast<std::size_t>(r.get<std::uint64_t>()));
    }
    cfg.leaky_slope = r.get<double>();
    cfg.validate();

    tae::TaeModel model = tae::init_tae(cfg, 0);
    model.pretrained = r.get<std::uint8_t>() != 0;

    auto load_into = [&](const std::string& name, Parameter& param) {
        Tensor t = r.get_tensor(name);
        if (t.shape() != param.value.shape()) {
            r.fail("tensor '" + name + "' has shape " + t.shape_string() + ", expected " +
                   param.value.shape_string());
        }
        param.value = std::move(t);
    };

    load_into("conv.kernels", model.conv_kernels);
    load_into("conv.bias", model.conv_bias);
    for (std::size_t i = 0; i < model.lstms.size(); ++i) {
        const std::string prefix = "lstm" + std::to_string(i);
        load_into(prefix + ".fwd.w_in", model.lstms[i].fwd.w_in);
        load_into(prefix + ".fwd.w_rec", model.lstms[i].fwd.w_rec);
        load_into(prefix + ".fwd.bias", model.lstms[i].fwd.bias);
        load_into(prefix + ".bwd.w_in", model.lstms[i].bwd.w_in);
        load_into(prefix + ".bwd.w_rec", model.lstms[i].bwd.w_rec);
        load_into(prefix + ".bwd.bias", model.lstms[i].bwd.bias);
    }
    load_into("deconv.kernels", model.deconv_kernels);
    load_into("deconv.bias", model.deconv_bias);
    return model;
}

}  // namespace

void save_checkpoint(const std::string& path, const tae::TaeModel& model,
                     const std::vector<std::vector<double>>* centroids) {
    Writer w;
    w.put(kVersion);
    append_model(w, model);

    const std::size_t k = centroids ? centroids->size() : 0;
    w.put(static_cast<std::uint64_t>(k));
    if (k > 0) {
        const std::size_t len = centroids->front().size();
        w.put(static_cast<std::uint64_t>(len));
        for (const auto& c : *centroids) {
            if (c.size() != len) {
                throw std::invalid_argument("save_checkpoint: ragged centroid list");
            }
            w.put_doubles(c);
        }
    }

    const std::uint64_t checksum = fnv1a64(w.bytes());
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write checkpoint: " + path);
    file.write(kMagic, sizeof(kMagic));
    file.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    file.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
    if (!file) throw std::runtime_error("write failed for checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open checkpoint: " + path);
    std::vector<char> bytes((std::istreambuf_iterator<char>(file)),
                            std::istreambuf_iterator<char>());

    if (bytes.size() < sizeof(kMagic) + sizeof(std::uint64_t) ||
        std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("checkpoint " + path + ": not a checkpoint file");
    }

    std::uint64_t stored_checksum = 0;
    std::memcpy(&stored_checksum, bytes.data() + bytes.size() - sizeof(std::uint64_t),
                sizeof(std::uint64_t));
    std::vector<char> payload(bytes.begin() + sizeof(kMagic),
                              bytes.end() - sizeof(std::uint64_t));
    if (fnv1a64(payload) != stored_checksum) {
        throw std::runtime_error("checkpoint " + path + ": checksum mismatch");
    }

    Reader r(std::move(payload), path);
    const auto version = r.get<std::uint32_t>();
    if (version != kVersion) {
        r.fail("unsupported version " + std::to_string(version));
    }

    Checkpoint ckpt;
    ckpt.model = read_model(r);

    const auto k = static_cast<std::size_t>(r.get<std::uint64_t>());
    if (k > 0) {
        const auto len = static_cast<std::size_t>(r.get<std::uint64_t>());
        for (std::size_t i = 0; i < k; ++i) ckpt.centroids.push_back(r.get_doubles(len));
    }
    if (!r.exhausted()) r.fail("trailing bytes after payload");
    return ckpt;
}

}  // namespace dtc::dataio
