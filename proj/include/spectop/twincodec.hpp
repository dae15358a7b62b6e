#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spectop/complex.hpp"
#include "spectop/maxcal.hpp"
#include "spectop/spectral.hpp"
#include "spectop/topology.hpp"

namespace spectop {

/// Spectral coefficients of one observation: coeffs(l, axis) = phi_l . V[:, axis].
struct CoefficientFrame {
    std::uint32_t frame_index = 0;
    int k = 0;
    Eigen::MatrixXd coeffs; // k x 3
};

CoefficientFrame project(const SpectralBasis& basis, const Eigen::MatrixX3d& positions,
                         int k);

/// V_hat = Phi_k * coeffs.
Eigen::MatrixX3d reconstruct(const SpectralBasis& basis, const CoefficientFrame& frame);

/// ||approx - reference||_F / ||reference - mean(reference)||_F.
double reconstruction_distortion(const Eigen::MatrixX3d& reference,
                                 const Eigen::MatrixX3d& approx);

/// Greedy extra-mode selection maximizing h*_l |c_l|^2 / T_l over modes past
/// the obligate floor (|c_l|^2 summed over axes; ties to the lower index;
/// zero-source modes ranked last). Returns the selected mode indices:
/// 0..k_min-1 plus `extra` chosen ones, ascending.
std::vector<int> budget_allocate(const Eigen::VectorXd& h_star,
                                 const CoefficientFrame& frame, const SourceModel& model,
                                 int k_min, int extra);

/// Wire envelope: magic "KCAL", version 0x01, frame index (u32 LE), mode
/// count (u16 LE), axis count byte (3), payload of k x 3 IEEE-754 binary32 LE
/// in mode-major order, CRC-32 (IEEE) of header + payload. 16 + 12k bytes.
struct FrameEnvelope {
    std::vector<std::uint8_t> bytes;
};

constexpr int kEnvelopeOverhead = 16; // header (12) + trailing crc (4)

/// Encode quantizes coefficients to binary32. Requires k <= 65535.
FrameEnvelope encode_frame(const CoefficientFrame& frame);

/// Decode verifies magic/version (FormatError), length (LengthError), and
/// checksum (CorruptionError). Values are the transmitted binary32 payload
/// widened back to double.
CoefficientFrame decode_frame(const FrameEnvelope& envelope);

std::uint32_t crc32_ieee(const std::uint8_t* data, std::size_t length);

/// Per-frame protocol knobs. Thresholds left as NaN are calibrated from the
/// first frame: H* = 0.9 H_0, gap* = 0.5 gap_0, leakage bound = 1.2 D_t0.
struct ProtocolConfig {
    double budget_bytes = 0.0; // bytes per frame, > 0
    int k_max = 0;             // modes carried by the solver state
    int k_nominal = 0;         // transmitted modes absent an alert; 0 = use full budget
    double mu2 = 2.0;
    double sigma2 = 1.0;
    double tau_prior = 0.0;    // h0_l = exp(-lambda_l * tau_prior)
    double c1 = 1.0;           // augmentation constant for the mode floor
    double entropy_threshold = std::numeric_limits<double>::quiet_NaN();
    double gap_threshold = std::numeric_limits<double>::quiet_NaN();
    double leakage_bound = std::numeric_limits<double>::quiet_NaN();
};

struct FrameRecord {
    std::uint32_t frame = 0;
    int k_t = 0;
    double entropy = 0.0;
    double gap = 0.0;
    double d_t = 0.0;
    bool boundary_alert = false;
    bool representation_limited = false;
    double distortion = 0.0;
    int envelope_bytes = 0;
};

struct ProtocolTrace {
    int k_min = 0;
    int affordable = 0; // modes the byte budget admits
    std::vector<FrameRecord> records;
    Eigen::MatrixXd sender_state;   // accumulated transmitted coefficients
    Eigen::MatrixXd receiver_state; // must match sender_state bit for bit
    std::vector<Eigen::MatrixXd> transmitted_deltas; // k_max x 3 per frame
};

/// One record per frame, JSON-lines.
std::string trace_to_jsonl(const ProtocolTrace& trace);

using ObservationStream = std::function<Eigen::MatrixX3d(int frame)>;

/// Run the bandwidth-constrained reconstruction loop for `frames` cycles:
/// project, solve the kernel fixed point with w_l = sum_axis c_l^2, evaluate
/// entropy/gap/leakage and alerts, pick k_t under the byte budget, transmit
/// coefficient deltas (binary32), and reconstruct at the receiver.
/// Deterministic given (complex, basis, config, stream).
ProtocolTrace protocol_run(const SurfaceComplex& complex, const SpectralBasis& basis,
                           const ProtocolConfig& config, const ObservationStream& stream,
                           int frames);

// --- shipped observation generators ---

ObservationStream static_stream(Eigen::MatrixX3d v0);

/// v0 plus a low-mode sinusoidal drift along z.
ObservationStream drift_stream(Eigen::MatrixX3d v0, const SpectralBasis& basis, int mode,
                               double amplitude, int period);

/// v0 until event_frame, then a broadband perturbation over modes >= low_mode
/// that concentrates kernel mass at the low end (entropy-dropping).
ObservationStream event_stream(Eigen::MatrixX3d v0, const SpectralBasis& basis,
                               int event_frame, double amplitude, int low_mode);

} // namespace spectop
