#include "spectop/twincodec.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

namespace spectop {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'K', 'C', 'A', 'L'};
constexpr std::uint8_t kVersion = 0x01;
constexpr int kAxes = 3;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u32(out, bits);
}

float get_f32(const std::uint8_t* p) {
    const std::uint32_t bits = get_u32(p);
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

} // namespace

std::uint32_t crc32_ieee(const std::uint8_t* data, std::size_t length) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int bit = 0; bit < 8; ++bit)
                c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < length; ++i)
        crc = table[(crc ^ data[i]) & 0xffu] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

CoefficientFrame project(const SpectralBasis& basis, const Eigen::MatrixX3d& positions,
                         int k) {
    if (k < 1 || k > basis.mode_count())
        throw ParameterError("mode count out of range");
    if (positions.rows() != basis.eigenvectors.rows())
        throw ParameterError("position rows must match the eigenbasis dimension");
    CoefficientFrame frame;
    frame.k = k;
    frame.coeffs = basis.eigenvectors.leftCols(k).transpose() * positions;
    return frame;
}

Eigen::MatrixX3d reconstruct(const SpectralBasis& basis, const CoefficientFrame& frame) {
    if (frame.k > basis.mode_count())
        throw ParameterError("frame has more modes than the basis");
    return basis.eigenvectors.leftCols(frame.k) * frame.coeffs.topRows(frame.k);
}

double reconstruction_distortion(const Eigen::MatrixX3d& reference,
                                 const Eigen::MatrixX3d& approx) {
    Eigen::MatrixX3d centered = reference;
    centered.rowwise() -= reference.colwise().mean();
    const double denom = centered.norm();
    if (denom == 0.0) return 0.0;
    return (approx - reference).norm() / denom;
}

std::vector<int> budget_allocate(const Eigen::VectorXd& h_star,
                                 const CoefficientFrame& frame, const SourceModel& model,
                                 int k_min, int extra) {
    const int n = frame.k;
    if (k_min < 0 || k_min > n) throw ParameterError("k_min out of range");
    if (extra < 0) throw ParameterError("extra mode count must be nonnegative");
    if (h_star.size() != n) throw ParameterError("kernel length must match frame modes");

    std::vector<int> chosen(static_cast<std::size_t>(k_min));
    std::iota(chosen.begin(), chosen.end(), 0);

    const Eigen::VectorXd t = source_eval(model, h_star, Eigen::VectorXd::Zero(n));
    struct Scored {
        double score;
        int index;
        bool zero_source;
    };
    std::vector<Scored> candidates;
    for (int l = k_min; l < n; ++l) {
        const double weight = frame.coeffs.row(l).squaredNorm();
        if (t(l) > 0.0)
            candidates.push_back({h_star(l) * weight / t(l), l, false});
        else
            candidates.push_back({0.0, l, true});
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.zero_source != b.zero_source) return !a.zero_source; // zero-source last
        if (a.score != b.score) return a.score > b.score;
        return a.index < b.index;
    });
    const int take = std::min<int>(extra, static_cast<int>(candidates.size()));
    for (int i = 0; i < take; ++i) chosen.push_back(candidates[i].index);
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

FrameEnvelope encode_frame(const CoefficientFrame& frame) {
    if (frame.k < 1 || frame.k > 65535) throw ParameterError("mode count must fit in 16 bits");
    if (frame.coeffs.rows() < frame.k || frame.coeffs.cols() != kAxes)
        throw ParameterError("coefficient matrix must be k x 3");

    FrameEnvelope env;
    env.bytes.reserve(kEnvelopeOverhead + 12 * static_cast<std::size_t>(frame.k));
    for (std::uint8_t m : kMagic) env.bytes.push_back(m);
    env.bytes.push_back(kVersion);
    put_u32(env.bytes, frame.frame_index);
    env.bytes.push_back(static_cast<std::uint8_t>(frame.k & 0xff));
    env.bytes.push_back(static_cast<std::uint8_t>((frame.k >> 8) & 0xff));
    env.bytes.push_back(kAxes);
    for (int l = 0; l < frame.k; ++l)
        for (int axis = 0; axis < kAxes; ++axis)
            put_f32(env.bytes, static_cast<float>(frame.coeffs(l, axis)));
    put_u32(env.bytes, crc32_ieee(env.bytes.data(), env.bytes.size()));
    return env;
}

CoefficientFrame decode_frame(const FrameEnvelope& envelope) {
    const auto& b = envelope.bytes;
    if (b.size() < kEnvelopeOverhead) throw LengthError("envelope shorter than header");
    if (!std::equal(kMagic.begin(), kMagic.end(), b.begin()))
        throw FormatError("bad magic");
    if (b[4] != kVersion) throw FormatError("unsupported version");
    const std::uint32_t frame_index = get_u32(b.data() + 5);
    const int k = static_cast<int>(b[9]) | (static_cast<int>(b[10]) << 8);
    if (b[11] != kAxes) throw FormatError("unsupported axis count");
    const std::size_t expected = kEnvelopeOverhead + 12 * static_cast<std::size_t>(k);
    if (b.size() != expected) throw LengthError("envelope length does not match mode count");
    const std::uint32_t stored = get_u32(b.data() + b.size() - 4);
    if (crc32_ieee(b.data(), b.size() - 4) != stored)
        throw CorruptionError("checksum mismatch");

    CoefficientFrame frame;
    frame.frame_index = frame_index;
    frame.k = k;
    frame.coeffs.resize(k, kAxes);
    for (int l = 0; l < k; ++l)
        for (int axis = 0; axis < kAxes; ++axis)
            frame.coeffs(l, axis) =
                static_cast<double>(get_f32(b.data() + 12 + 12 * l + 4 * axis));
    return frame;
}

std::string trace_to_jsonl(const ProtocolTrace& trace) {
    std::ostringstream out;
    char buf[64];
    auto num = [&buf](double v) {
        if (!std::isfinite(v)) return std::string("null"); // saturated diagnostic
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    for (const auto& r : trace.records) {
        out << "{\"frame\":" << r.frame << ",\"k_t\":" << r.k_t
            << ",\"entropy\":" << num(r.entropy) << ",\"gap\":" << num(r.gap)
            << ",\"d_t\":" << num(r.d_t)
            << ",\"boundary_alert\":" << (r.boundary_alert ? "true" : "false")
            << ",\"representation_limited\":" << (r.representation_limited ? "true" : "false")
            << ",\"distortion\":" << num(r.distortion)
            << ",\"envelope_bytes\":" << r.envelope_bytes << "}\n";
    }
    return out.str();
}

ProtocolTrace protocol_run(const SurfaceComplex& complex, const SpectralBasis& basis,
                           const ProtocolConfig& config, const ObservationStream& stream,
                           int frames) {
    if (!(config.budget_bytes > 0.0)) throw ParameterError("byte budget must be positive");
    if (frames < 1) throw ParameterError("need at least one frame");
    const int k_max = config.k_max > 0 ? std::min(config.k_max, basis.mode_count())
                                       : basis.mode_count();

    ProtocolTrace trace;
    {
        const HodgeLaplacians laplacians = hodge_laplacians(complex);
        const BettiNumbers betti = betti_numbers(laplacians);
        const CycleBasis cycles = cycle_basis(complex);
        trace.k_min = compression_floor(betti, basis, cycles, config.c1).k_min;
    }
    const int usable = static_cast<int>(config.budget_bytes) - kEnvelopeOverhead;
    trace.affordable = std::clamp(usable / 12, 1, k_max);
    if (k_max < trace.k_min)
        throw ParameterError("k_max below the topology floor");

    Eigen::VectorXd h0(k_max);
    for (int l = 0; l < k_max; ++l)
        h0(l) = std::exp(-basis.eigenvalues(l) * config.tau_prior);

    double entropy_threshold = config.entropy_threshold;
    double gap_threshold = config.gap_threshold;
    double leakage_bound = config.leakage_bound;

    trace.sender_state = Eigen::MatrixXd::Zero(k_max, 3);
    trace.receiver_state = Eigen::MatrixXd::Zero(k_max, 3);

    for (int t = 0; t < frames; ++t) {
        const Eigen::MatrixX3d positions = stream(t);
        CoefficientFrame frame = project(basis, positions, k_max);
        frame.frame_index = static_cast<std::uint32_t>(t);
        // wire precision up front so a static scene yields exactly zero deltas
        for (int l = 0; l < k_max; ++l)
            for (int axis = 0; axis < 3; ++axis)
                frame.coeffs(l, axis) =
                    static_cast<double>(static_cast<float>(frame.coeffs(l, axis)));

        Eigen::VectorXd w(k_max);
        for (int l = 0; l < k_max; ++l) w(l) = frame.coeffs.row(l).squaredNorm();
        const SourceModel model = GaussianMiSource{config.mu2, config.sigma2, w};
        const FixedPointReport fp =
            fixed_point_solve(h0, model, basis.eigenvalues.head(k_max));

        FrameRecord record;
        record.frame = frame.frame_index;
        record.entropy = spectral_entropy(fp.h_star);
        record.gap = hessian_and_gap(fp, model).gap;

        if (t == 0) {
            if (std::isnan(entropy_threshold)) entropy_threshold = 0.9 * record.entropy;
            if (std::isnan(gap_threshold)) gap_threshold = 0.5 * record.gap;
        }
        record.boundary_alert =
            record.entropy < entropy_threshold || record.gap < gap_threshold;

        // mode selection under the byte budget; an alert extends the prefix to
        // everything the budget affords
        int k_t = trace.affordable;
        if (!record.boundary_alert && config.k_nominal > 0)
            k_t = std::min(k_t, config.k_nominal);
        if (k_t >= trace.k_min) {
            const int extra = k_t - trace.k_min;
            const auto allocation = budget_allocate(fp.h_star, frame, model, trace.k_min, extra);
            k_t = std::max(trace.k_min, static_cast<int>(allocation.size()));
        }
        record.k_t = k_t;

        record.d_t = leakage_diagnostic(fp, model, k_t);
        if (t == 0 && std::isnan(leakage_bound)) leakage_bound = 1.2 * record.d_t;
        record.representation_limited = record.d_t > leakage_bound || k_t < trace.k_min;

        // delta against the mirrored transmitted state, quantized to binary32
        CoefficientFrame delta;
        delta.frame_index = frame.frame_index;
        delta.k = k_t;
        delta.coeffs.resize(k_t, 3);
        for (int l = 0; l < k_t; ++l)
            for (int axis = 0; axis < 3; ++axis)
                delta.coeffs(l, axis) = static_cast<double>(static_cast<float>(
                    frame.coeffs(l, axis) - trace.sender_state(l, axis)));

        const FrameEnvelope envelope = encode_frame(delta);
        record.envelope_bytes = static_cast<int>(envelope.bytes.size());
        const CoefficientFrame received = decode_frame(envelope);

        Eigen::MatrixXd full_delta = Eigen::MatrixXd::Zero(k_max, 3);
        for (int l = 0; l < k_t; ++l) {
            for (int axis = 0; axis < 3; ++axis) {
                trace.sender_state(l, axis) += delta.coeffs(l, axis);
                trace.receiver_state(l, axis) += received.coeffs(l, axis);
                full_delta(l, axis) = delta.coeffs(l, axis);
            }
        }
        trace.transmitted_deltas.push_back(std::move(full_delta));

        CoefficientFrame receiver_view;
        receiver_view.frame_index = frame.frame_index;
        receiver_view.k = k_t;
        receiver_view.coeffs = trace.receiver_state.topRows(k_t);
        record.distortion =
            reconstruction_distortion(positions, reconstruct(basis, receiver_view));

        trace.records.push_back(record);
    }
    return trace;
}

ObservationStream static_stream(Eigen::MatrixX3d v0) {
    return [v0 = std::move(v0)](int) { return v0; };
}

ObservationStream drift_stream(Eigen::MatrixX3d v0, const SpectralBasis& basis, int mode,
                               double amplitude, int period) {
    if (mode < 0 || mode >= basis.mode_count()) throw ParameterError("drift mode out of range");
    if (period < 1) throw ParameterError("period must be positive");
    Eigen::VectorXd shape = basis.eigenvectors.col(mode);
    return [v0 = std::move(v0), shape = std::move(shape), amplitude, period](int t) {
        Eigen::MatrixX3d v = v0;
        v.col(2) += amplitude * std::sin(2.0 * M_PI * t / period) * shape;
        return v;
    };
}

ObservationStream event_stream(Eigen::MatrixX3d v0, const SpectralBasis& basis,
                               int event_frame, double amplitude, int low_mode) {
    if (low_mode < 0 || low_mode >= basis.mode_count())
        throw ParameterError("low mode out of range");
    // equal-weight broadband bump over modes >= low_mode
    Eigen::VectorXd shape = Eigen::VectorXd::Zero(basis.eigenvectors.rows());
    const int n_modes = basis.mode_count() - low_mode;
    for (int l = low_mode; l < basis.mode_count(); ++l)
        shape += basis.eigenvectors.col(l) / std::sqrt(static_cast<double>(n_modes));
    return [v0 = std::move(v0), shape = std::move(shape), event_frame, amplitude](int t) {
        Eigen::MatrixX3d v = v0;
        if (t >= event_frame) v.col(2) += amplitude * shape;
        return v;
    };
}

} // namespace spectop
