#pragma once

// OFDM emitter simulation: 16QAM mapping, IDFT + cyclic prefix, block Rayleigh
// fading, AWGN, and labeled dataset generation for the emitter/no-emitter test.

#include "specgan/common.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace specgan {

enum class Constellation : std::uint8_t { Qam16 };

struct OfdmConfig {
    std::size_t n_data = 32;   ///< subcarriers per OFDM symbol (power of two)
    std::size_t n_cp = 8;      ///< cyclic prefix length
    std::size_t k_symbols = 1; ///< OFDM symbols per frame
    Constellation constellation = Constellation::Qam16;

    std::size_t frame_length() const { return k_symbols * (n_cp + n_data); }
    std::size_t feature_length() const { return 2 * frame_length(); }
    /// Throws InvalidInput when an invariant is violated.
    void validate() const;
};

/// Where the SNR is referenced: at the sensor (post-channel) or at the transmitter.
enum class SnrReference : std::uint8_t { Receive, Transmit };

struct ChannelEnv {
    std::size_t n_taps = 4;
    double variance = 1.0; ///< total expected tap power
    double snr_db = 0.0;
    SnrReference snr_reference = SnrReference::Receive;

    void validate() const;
};

struct IqFrame {
    ComplexVec samples;
};

struct LabeledDataset {
    std::vector<IqFrame> frames;
    Labels labels;
    ChannelEnv env;
    OfdmConfig ofdm;
    std::uint64_t seed = 0;

    std::size_t size() const { return frames.size(); }
    /// Feature matrix, one row per frame (see frame_to_features).
    Matrix features() const;
};

/// Gray-coded 16QAM with unit average symbol power. Bits are consumed MSB-first
/// in groups of four: the first two select the in-phase level, the last two the
/// quadrature level.
ComplexVec map_16qam(std::span<const std::uint8_t> bits);

/// Unitary DFT / IDFT (scale 1/sqrt(N) both ways). Radix-2; size must be a power of two.
ComplexVec unitary_dft(std::span<const Complex> x);
ComplexVec unitary_idft(std::span<const Complex> x);

/// Builds one frame from K*n_data subcarrier symbols. When `symbols` is empty a
/// random 16QAM payload is drawn from `rng`.
IqFrame build_ofdm_frame(std::span<const Complex> symbols, const OfdmConfig& cfg, Rng& rng);

/// n_taps i.i.d. CN(0, variance / n_taps) taps.
ComplexVec draw_rayleigh_taps(const ChannelEnv& env, Rng& rng);

/// Linear convolution truncated to the frame length.
IqFrame apply_channel(const IqFrame& frame, std::span<const Complex> taps);

/// Adds CN(0, signal_power / 10^(snr_db/10)) noise to every sample.
IqFrame add_awgn(const IqFrame& frame, double snr_db, double signal_power, Rng& rng);

/// Balanced dataset: even indices carry no emitter (label 0), odd indices carry
/// an emitter (label 1). Each frame draws from its own stream derived from
/// (seed, frame index), so generation order does not matter.
LabeledDataset generate_dataset(std::size_t n_samples, const OfdmConfig& cfg,
                                const ChannelEnv& env, std::uint64_t seed);

/// Interleaved [Re s0, Im s0, Re s1, ...].
std::vector<double> frame_to_features(const IqFrame& frame);
IqFrame features_to_frame(std::span<const double> features);

// SIQD v1 dataset container.
void write_siqd(std::ostream& os, const LabeledDataset& ds);
LabeledDataset read_siqd(std::istream& is);
void save_siqd(const std::filesystem::path& path, const LabeledDataset& ds);
LabeledDataset load_siqd(const std::filesystem::path& path);

}  // namespace specgan
