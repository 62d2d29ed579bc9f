#include "specgan/signalgen.hpp"

#include "specgan/binio.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace specgan {

namespace {

constexpr char kSiqdMagic[] = "SIQD";
constexpr std::uint16_t kSiqdVersion = 1;

// Gray-coded PAM-4 level for a bit pair (b0 is the more significant bit).
double gray_level(std::uint8_t b0, std::uint8_t b1) {
    static constexpr double kLevels[4] = {-3.0, -1.0, 3.0, 1.0}; // 00, 01, 10, 11
    return kLevels[(b0 << 1) | b1];
}

void fft_in_place(ComplexVec& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0) {
        return;
    }
    if (!std::has_single_bit(n)) {
        throw InvalidInput("DFT size must be a power of two");
    }
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) {
            j ^= bit;
        }
        j ^= bit;
        if (i < j) {
            std::swap(a[i], a[j]);
        }
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                // Twiddles computed directly rather than by repeated multiplication,
                // which keeps round-off at the 1e-16 level for every k.
                const double t = ang * static_cast<double>(k);
                const Complex w(std::cos(t), std::sin(t));
                const Complex u = a[i + k];
                const Complex v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : a) {
        v *= scale;
    }
}

void require_finite(const ComplexVec& v) {
    for (const auto& c : v) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
            throw InvalidInput("non-finite sample");
        }
    }
}

}  // namespace

void OfdmConfig::validate() const {
    if (n_data == 0 || !std::has_single_bit(n_data)) {
        throw InvalidInput("n_data must be a power of two");
    }
    if (n_cp >= n_data) {
        throw InvalidInput("n_cp must be smaller than n_data");
    }
    if (k_symbols < 1) {
        throw InvalidInput("k_symbols must be at least 1");
    }
}

void ChannelEnv::validate() const {
    if (n_taps < 1) {
        throw InvalidInput("n_taps must be at least 1");
    }
    if (!(variance > 0.0) || !std::isfinite(variance)) {
        throw InvalidInput("channel variance must be positive");
    }
    if (!std::isfinite(snr_db)) {
        throw InvalidInput("snr_db must be finite");
    }
}

ComplexVec map_16qam(std::span<const std::uint8_t> bits) {
    if (bits.size() % 4 != 0) {
        throw InvalidInput("16QAM needs a multiple of 4 bits");
    }
    const double norm = 1.0 / std::sqrt(10.0);
    ComplexVec out;
    out.reserve(bits.size() / 4);
    for (std::size_t i = 0; i < bits.size(); i += 4) {
        for (std::size_t k = 0; k < 4; ++k) {
            if (bits[i + k] > 1) {
                throw InvalidInput("bit values must be 0 or 1");
            }
        }
        out.emplace_back(gray_level(bits[i], bits[i + 1]) * norm,
                         gray_level(bits[i + 2], bits[i + 3]) * norm);
    }
    return out;
}

ComplexVec unitary_dft(std::span<const Complex> x) {
    ComplexVec a(x.begin(), x.end());
    fft_in_place(a, false);
    return a;
}

ComplexVec unitary_idft(std::span<const Complex> x) {
    ComplexVec a(x.begin(), x.end());
    fft_in_place(a, true);
    return a;
}

IqFrame build_ofdm_frame(std::span<const Complex> symbols, const OfdmConfig& cfg, Rng& rng) {
    cfg.validate();
    const std::size_t n_sub = cfg.k_symbols * cfg.n_data;
    ComplexVec payload;
    if (symbols.empty()) {
        std::vector<std::uint8_t> bits(4 * n_sub);
        for (auto& b : bits) {
            b = static_cast<std::uint8_t>(rng() >> 63);
        }
        payload = map_16qam(bits);
        symbols = payload;
    }
    if (symbols.size() != n_sub) {
        throw InvalidInput("expected " + std::to_string(n_sub) + " subcarrier symbols, got " +
                           std::to_string(symbols.size()));
    }

    IqFrame frame;
    frame.samples.reserve(cfg.frame_length());
    for (std::size_t k = 0; k < cfg.k_symbols; ++k) {
        const ComplexVec body = unitary_idft(symbols.subspan(k * cfg.n_data, cfg.n_data));
        frame.samples.insert(frame.samples.end(), body.end() - static_cast<std::ptrdiff_t>(cfg.n_cp),
                             body.end());
        frame.samples.insert(frame.samples.end(), body.begin(), body.end());
    }
    return frame;
}

ComplexVec draw_rayleigh_taps(const ChannelEnv& env, Rng& rng) {
    env.validate();
    const double per_tap = env.variance / static_cast<double>(env.n_taps);
    ComplexVec taps(env.n_taps);
    for (auto& t : taps) {
        t = complex_gauss(rng, per_tap);
    }
    return taps;
}

IqFrame apply_channel(const IqFrame& frame, std::span<const Complex> taps) {
    if (taps.empty()) {
        throw InvalidInput("channel needs at least one tap");
    }
    const std::size_t n = frame.samples.size();
    IqFrame out{ComplexVec(n, Complex{})};
    for (std::size_t i = 0; i < n; ++i) {
        Complex acc{};
        const std::size_t kmax = std::min(taps.size(), i + 1);
        for (std::size_t k = 0; k < kmax; ++k) {
            acc += taps[k] * frame.samples[i - k];
        }
        out.samples[i] = acc;
    }
    return out;
}

IqFrame add_awgn(const IqFrame& frame, double snr_db, double signal_power, Rng& rng) {
    if (!(signal_power > 0.0)) {
        throw InvalidInput("signal_power must be positive");
    }
    const double noise_var = signal_power / std::pow(10.0, snr_db / 10.0);
    IqFrame out = frame;
    for (auto& s : out.samples) {
        s += complex_gauss(rng, noise_var);
    }
    return out;
}

LabeledDataset generate_dataset(std::size_t n_samples, const OfdmConfig& cfg,
                                const ChannelEnv& env, std::uint64_t seed) {
    if (n_samples < 2) {
        throw InvalidInput("dataset needs at least 2 samples");
    }
    cfg.validate();
    env.validate();

    LabeledDataset ds;
    ds.env = env;
    ds.ofdm = cfg;
    ds.seed = seed;
    ds.frames.resize(n_samples);
    ds.labels.resize(n_samples);

    // Pass 1: noise-free faded emitter signals. Label 0 frames stay all-zero.
    const std::size_t n = cfg.frame_length();
    double power_sum = 0.0;
    std::size_t power_count = 0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const Label label = static_cast<Label>(i % 2);
        ds.labels[i] = label;
        if (label == 0) {
            ds.frames[i].samples.assign(n, Complex{});
            continue;
        }
        Rng rng = make_rng(derive_seed(seed, i, 0));
        const IqFrame tx = build_ofdm_frame({}, cfg, rng);
        const ComplexVec taps = draw_rayleigh_taps(env, rng);
        ds.frames[i] = apply_channel(tx, taps);
        for (const auto& s : ds.frames[i].samples) {
            power_sum += std::norm(s);
        }
        power_count += n;
    }

    double signal_power = 1.0;  // unit-power transmit symbols
    if (env.snr_reference == SnrReference::Receive) {
        signal_power = power_sum / static_cast<double>(power_count);
        if (!(signal_power > 0.0)) {
            signal_power = env.variance;
        }
    }

    // Pass 2: AWGN at the calibrated level, one independent stream per frame.
    for (std::size_t i = 0; i < n_samples; ++i) {
        Rng rng = make_rng(derive_seed(seed, i, 1));
        ds.frames[i] = add_awgn(ds.frames[i], env.snr_db, signal_power, rng);
        require_finite(ds.frames[i].samples);
    }
    return ds;
}

std::vector<double> frame_to_features(const IqFrame& frame) {
    std::vector<double> f;
    f.reserve(2 * frame.samples.size());
    for (const auto& s : frame.samples) {
        f.push_back(s.real());
        f.push_back(s.imag());
    }
    return f;
}

IqFrame features_to_frame(std::span<const double> features) {
    if (features.size() % 2 != 0) {
        throw InvalidInput("feature vector length must be even");
    }
    IqFrame frame;
    frame.samples.reserve(features.size() / 2);
    for (std::size_t i = 0; i < features.size(); i += 2) {
        frame.samples.emplace_back(features[i], features[i + 1]);
    }
    return frame;
}

Matrix LabeledDataset::features() const {
    const std::size_t width = frames.empty() ? 0 : 2 * frames.front().samples.size();
    Matrix m(static_cast<Eigen::Index>(frames.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (2 * frames[i].samples.size() != width) {
            throw ShapeMismatch("frames have unequal lengths");
        }
        const auto f = frame_to_features(frames[i]);
        for (std::size_t j = 0; j < width; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f[j];
        }
    }
    return m;
}

void write_siqd(std::ostream& os, const LabeledDataset& ds) {
    using binio::put;
    if (ds.frames.size() != ds.labels.size()) {
        throw InvalidInput("frames and labels differ in length");
    }
    const std::size_t n = ds.frames.empty() ? ds.ofdm.frame_length() : ds.frames.front().samples.size();
    binio::put_magic(os, kSiqdMagic);
    put<std::uint16_t>(os, kSiqdVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(ds.frames.size()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(n));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(2 * n));
    put<double>(os, ds.env.snr_db);
    put<double>(os, ds.env.variance);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(ds.env.n_taps));
    put<std::uint64_t>(os, ds.seed);
    for (std::size_t i = 0; i < ds.frames.size(); ++i) {
        if (ds.frames[i].samples.size() != n) {
            throw InvalidInput("frames have unequal lengths");
        }
        if (ds.labels[i] > 1) {
            throw InvalidInput("labels must be 0 or 1");
        }
        put<std::uint8_t>(os, ds.labels[i]);
        for (const auto& s : ds.frames[i].samples) {
            put<float>(os, static_cast<float>(s.real()));
            put<float>(os, static_cast<float>(s.imag()));
        }
    }
}

LabeledDataset read_siqd(std::istream& is) {
    using binio::get;
    binio::expect_magic<DatasetIoError>(is, kSiqdMagic);
    const auto version = get<std::uint16_t, DatasetIoError>(is);
    if (version != kSiqdVersion) {
        throw DatasetIoError("unsupported SIQD version " + std::to_string(version));
    }
    const auto count = get<std::uint32_t, DatasetIoError>(is);
    const auto n = get<std::uint32_t, DatasetIoError>(is);
    const auto feat = get<std::uint32_t, DatasetIoError>(is);
    if (feat != 2 * n) {
        throw DatasetIoError("feature length does not equal 2N");
    }
    LabeledDataset ds;
    ds.env.snr_db = get<double, DatasetIoError>(is);
    ds.env.variance = get<double, DatasetIoError>(is);
    ds.env.n_taps = get<std::uint32_t, DatasetIoError>(is);
    ds.seed = get<std::uint64_t, DatasetIoError>(is);
    // The container records N but not its N_d/N_c split.
    if (n != OfdmConfig{}.frame_length()) {
        ds.ofdm = OfdmConfig{n, 0, 1, Constellation::Qam16};
    }
    ds.frames.resize(count);
    ds.labels.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto label = get<std::uint8_t, DatasetIoError>(is);
        if (label > 1) {
            throw DatasetIoError("label out of range");
        }
        ds.labels[i] = label;
        auto& samples = ds.frames[i].samples;
        samples.resize(n);
        for (std::uint32_t k = 0; k < n; ++k) {
            const float re = get<float, DatasetIoError>(is);
            const float im = get<float, DatasetIoError>(is);
            samples[k] = Complex(re, im);
        }
    }
    return ds;
}

void save_siqd(const std::filesystem::path& path, const LabeledDataset& ds) {
    std::ostringstream os(std::ios::binary);
    write_siqd(os, ds);
    binio::write_file_atomic(path, os.str());
}

LabeledDataset load_siqd(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw DatasetIoError("cannot open dataset: " + path.string());
    }
    return read_siqd(is);
}

}  // namespace specgan
