#pragma once

// STT-RAM retention relaxation: thermal barrier, retention time, critical
// current and precessional switching duration of an MTJ cell, plus the
// calibrated retention -> (pulse width, current, write latency) mapping used
// to configure the low-retention L2 partition.
//
// All quantities are SI. Calibration happens once at construction of a
// DesignTable; every function here is pure and thread-safe.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "rrap/error.hpp"
#include "rrap/units.hpp"

namespace rrap::device {

namespace constants {
inline constexpr double kBohrMagneton = 9.2740100783e-24;    // J/T
inline constexpr double kElectronCharge = 1.602176634e-19;   // C
inline constexpr double kGyromagneticRatio = 1.76085963023e11; // 1/(s*T)
inline constexpr double kBoltzmann = 1.380649e-23;           // J/K
inline constexpr double kEulerConstant = 0.577;              // value used by the switching model
} // namespace constants

struct MtjDevice {
    double saturation_magnetization = 0;  // Ms, A/m
    double anisotropy_field = 0;          // Hk, reduced so that Ms*Hk*V/T is the barrier ratio
    double free_layer_volume = 0;         // V, m^3
    double temperature = 0;               // T, K
    double fitting_constant = 0;          // t1, s
    double tunneling_polarization = 0;    // P, in (0,1)
    double free_layer_moment = 0;         // m, A*m^2
    double damping = 0;                   // alpha
    double gyromagnetic_constant = constants::kGyromagneticRatio;
    double polarization_efficiency = 0;   // g
    double barrier_energy = 0;            // E, J
    double euler_constant = constants::kEulerConstant;
    double bohr_magneton = constants::kBohrMagneton;
    double electron_charge = constants::kElectronCharge;

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::domain_error(std::string("MTJ parameter must be positive: ") + name);
        };
        positive(saturation_magnetization, "saturation_magnetization");
        positive(anisotropy_field, "anisotropy_field");
        positive(free_layer_volume, "free_layer_volume");
        positive(temperature, "temperature");
        positive(fitting_constant, "fitting_constant");
        positive(free_layer_moment, "free_layer_moment");
        positive(damping, "damping");
        positive(gyromagnetic_constant, "gyromagnetic_constant");
        positive(polarization_efficiency, "polarization_efficiency");
        positive(barrier_energy, "barrier_energy");
        positive(bohr_magneton, "bohr_magneton");
        positive(electron_charge, "electron_charge");
        if (!(tunneling_polarization > 0.0 && tunneling_polarization < 1.0))
            throw std::domain_error("tunneling_polarization must lie in (0,1)");
        if (euler_constant != constants::kEulerConstant)
            throw std::domain_error("euler_constant is fixed at 0.577");
    }
};

struct OperatingPoint {
    double write_pulse_width = 0;  // s
    double write_current = 0;      // A
    double retention_time = 0;     // s
    Cycle write_latency_cycles = 0;
};

// Delta = Ms * Hk * V / T.
inline double thermal_barrier(const MtjDevice& dev) {
    for (double v : {dev.saturation_magnetization, dev.anisotropy_field, dev.free_layer_volume,
                     dev.temperature})
        if (!(v > 0.0)) throw std::domain_error("thermal_barrier: non-positive Ms, Hk, V or T");
    return dev.saturation_magnetization * dev.anisotropy_field * dev.free_layer_volume / dev.temperature;
}

// t = t1 * e^Delta.
inline double retention_time(double delta, double t1) {
    if (!(t1 > 0.0)) throw std::domain_error("retention_time: t1 must be positive");
    return t1 * std::exp(delta);
}

inline double delta_for_retention(double target, double t1) {
    if (!(target > 0.0) || !(t1 > 0.0))
        throw std::domain_error("delta_for_retention: retention and t1 must be positive");
    return std::log(target / t1);
}

// Ic = 2 * alpha * (gamma * e / (muB * g)) * E.
inline double critical_current(const MtjDevice& dev) {
    if (dev.polarization_efficiency == 0.0)
        throw std::domain_error("critical_current: polarization efficiency g is zero");
    return 2.0 * dev.damping * (dev.gyromagnetic_constant * dev.electron_charge /
                                (dev.bohr_magneton * dev.polarization_efficiency)) *
           dev.barrier_energy;
}

namespace detail {
// [2/(C + ln(pi^2 Delta))] * muB * P / (e * m * (1 + P^2)); multiply by
// (Iwrite - Ic) for the switching rate 1/tau.
inline double switching_rate_per_amp(const MtjDevice& dev) {
    const double delta = thermal_barrier(dev);
    const double log_arg = std::numbers::pi * std::numbers::pi * delta;
    if (!(log_arg > 0.0)) throw std::domain_error("switching model requires pi^2 * Delta > 0");
    const double denom = dev.euler_constant + std::log(log_arg);
    if (!(denom > 0.0)) throw std::domain_error("switching model requires C + ln(pi^2 Delta) > 0");
    const double p = dev.tunneling_polarization;
    return (2.0 / denom) * (dev.bohr_magneton * p /
                            (dev.electron_charge * dev.free_layer_moment * (1.0 + p * p)));
}
} // namespace detail

// Mean precessional switching duration tau1 for a write current above Ic.
inline double switching_duration(const MtjDevice& dev, double i_write) {
    const double ic = critical_current(dev);
    if (!(i_write > ic))
        throw RegimeError("write current " + units::format_double(i_write) +
                          " A is not above the critical current " + units::format_double(ic) +
                          " A (thermal-activation region, out of model scope)");
    return 1.0 / (detail::switching_rate_per_amp(dev) * (i_write - ic));
}

// Inverse of switching_duration: the current that switches in `pulse` seconds.
inline double write_current_for_pulse(const MtjDevice& dev, double pulse) {
    if (!(pulse > 0.0)) throw std::domain_error("pulse width must be positive");
    return critical_current(dev) + 1.0 / (detail::switching_rate_per_amp(dev) * pulse);
}

// A family of cells sharing material parameters whose free-layer volume is
// scaled (planar area and thickness reduction) to reach a target retention.
// Moment and barrier energy scale with the volume.
class DeviceFamily {
public:
    DeviceFamily() = default;
    explicit DeviceFamily(MtjDevice reference) : ref_(reference) {
        ref_.validate();
        ref_delta_ = thermal_barrier(ref_);
    }

    const MtjDevice& reference() const { return ref_; }
    double t1() const { return ref_.fitting_constant; }

    MtjDevice at_delta(double delta) const {
        if (!(delta > 0.0)) throw std::domain_error("device family: Delta must be positive");
        const double k = delta / ref_delta_;
        MtjDevice d = ref_;
        d.free_layer_volume *= k;
        d.free_layer_moment *= k;
        d.barrier_energy *= k;
        return d;
    }

    MtjDevice at_retention(double seconds) const {
        return at_delta(delta_for_retention(seconds, ref_.fitting_constant));
    }

private:
    MtjDevice ref_;
    double ref_delta_ = 1.0;
};

// Two (retention, pulse, current) points the family must pass through.
struct CalibrationPoint {
    double retention;    // s
    double pulse_width;  // s
    double current;      // A
};

struct CalibrationInputs {
    CalibrationPoint low{10e-3, 2e-9, 79e-6};                          // LRSC
    CalibrationPoint high{10.0 * units::kSecondsPerYear, 10e-9, 90e-6}; // HRSC
    double saturation_magnetization = 1.1e6;  // A/m
    double temperature = 350.0;               // K
    double fitting_constant = 1e-9;           // t1, s
    double tunneling_polarization = 0.6;
    double damping = 0.01;
};

struct Calibration {
    DeviceFamily family;
    // Relative current error of the fitted curve at each calibration pulse.
    double low_residual = 0;
    double high_residual = 0;
};

// Fit procedure. With V = s * Delta, m = Ms * V and E = Delta * kB * T, the
// switching relation at each point is linear in the two unknowns
//   a  = e * Ms * s * (1 + P^2) / (2 * muB * P)
//   kc = Ic / Delta = 2 * alpha * gamma * e * kB * T / (muB * g)
// namely a * (C + ln(pi^2 Delta)) * Delta + tau * Delta * kc = tau * I.
// Solving the 2x2 system yields the volume scale s and efficiency g; Hk is
// then set so that Ms * Hk * V / T reproduces Delta.
inline Calibration calibrate(const CalibrationInputs& in) {
    using namespace constants;
    const double dl = delta_for_retention(in.low.retention, in.fitting_constant);
    const double dh = delta_for_retention(in.high.retention, in.fitting_constant);
    auto log_term = [](double d) { return kEulerConstant + std::log(std::numbers::pi * std::numbers::pi * d); };

    const double a11 = log_term(dl) * dl, a12 = in.low.pulse_width * dl;
    const double a21 = log_term(dh) * dh, a22 = in.high.pulse_width * dh;
    const double b1 = in.low.pulse_width * in.low.current;
    const double b2 = in.high.pulse_width * in.high.current;
    const double det = a11 * a22 - a12 * a21;
    if (std::abs(det) < 1e-300) throw ConfigError("calibration points are degenerate");
    const double a = (b1 * a22 - a12 * b2) / det;
    const double kc = (a11 * b2 - a21 * b1) / det;
    if (!(a > 0.0) || !(kc > 0.0))
        throw ConfigError("calibration points do not admit a physical fit (non-positive moment or Ic)");

    const double p = in.tunneling_polarization;
    const double ms = in.saturation_magnetization;
    const double t = in.temperature;
    const double s = a * 2.0 * kBohrMagneton * p / (kElectronCharge * ms * (1.0 + p * p));
    const double g = 2.0 * in.damping * kGyromagneticRatio * kElectronCharge * kBoltzmann * t /
                     (kBohrMagneton * kc);

    MtjDevice ref;
    ref.saturation_magnetization = ms;
    ref.temperature = t;
    ref.fitting_constant = in.fitting_constant;
    ref.tunneling_polarization = p;
    ref.damping = in.damping;
    ref.polarization_efficiency = g;
    ref.free_layer_volume = s * dl;
    ref.free_layer_moment = ms * ref.free_layer_volume;
    ref.barrier_energy = dl * kBoltzmann * t;
    ref.anisotropy_field = t / (ms * s);

    Calibration cal{DeviceFamily(ref), 0, 0};
    auto residual = [&](const CalibrationPoint& pt) {
        const MtjDevice d = cal.family.at_retention(pt.retention);
        return std::abs(write_current_for_pulse(d, pt.pulse_width) - pt.current) / pt.current;
    };
    cal.low_residual = residual(in.low);
    cal.high_residual = residual(in.high);
    return cal;
}

// Write latency minus pulse width in the L2 bank characterization (2.153ns
// for a 2ns LRSC pulse, 10.153ns for a 10ns HRSC pulse).
inline constexpr double kPeripheralWriteOverhead = 0.153e-9;

struct DesignPoint {
    std::string name;
    double retention = 0;         // s
    Cycle latency_cycles = 0;     // at the table's reference clock
    std::optional<double> write_current;  // A; fitted from latency_cycles when absent
    bool refreshed = false;       // retention short enough to need periodic refresh
};

// Retention -> write latency. Exact lookup at configured design points;
// between points the write current is interpolated linearly in Delta and the
// calibrated switching curve gives the pulse width, rounded up to cycles.
class DesignTable {
public:
    DesignTable(Calibration cal, std::vector<DesignPoint> points, double reference_clock_hz,
                double peripheral_overhead = kPeripheralWriteOverhead)
        : cal_(std::move(cal)), points_(std::move(points)), ref_clock_(reference_clock_hz),
          overhead_(peripheral_overhead) {
        if (points_.empty()) throw ConfigError("design table is empty");
        std::sort(points_.begin(), points_.end(),
                  [](const DesignPoint& x, const DesignPoint& y) { return x.retention < y.retention; });
        for (std::size_t i = 1; i < points_.size(); ++i)
            if (!(points_[i].retention > points_[i - 1].retention))
                throw ConfigError("design table retentions must be distinct");
        for (auto& p : points_) {
            if (p.write_current) continue;
            if (p.latency_cycles == 0) throw ConfigError("design point '" + p.name + "' needs a latency or a current");
            // Fit to the middle of the latency's cycle bucket.
            const double pulse = (static_cast<double>(p.latency_cycles) - 0.5) / ref_clock_ - overhead_;
            p.write_current = write_current_for_pulse(cal_.family.at_retention(p.retention), pulse);
        }
        for (const auto& p : points_) {
            const Cycle c = curve_cycles(p.retention, *p.write_current, ref_clock_);
            if (p.latency_cycles != 0 && c != p.latency_cycles)
                throw ConfigError("design point '" + p.name + "' inconsistent with the switching curve: " +
                                  std::to_string(c) + " vs " + std::to_string(p.latency_cycles) + " cycles");
        }
    }

    const Calibration& calibration() const { return cal_; }
    const std::vector<DesignPoint>& points() const { return points_; }
    double reference_clock_hz() const { return ref_clock_; }
    double min_retention() const { return points_.front().retention; }
    double max_retention() const { return points_.back().retention; }

    const DesignPoint* find(const std::string& name) const {
        for (const auto& p : points_)
            if (p.name == name) return &p;
        return nullptr;
    }

    OperatingPoint operating_point(double retention, double clock_hz) const {
        check_range(retention);
        const double current = interpolated_current(retention);
        const MtjDevice dev = cal_.family.at_retention(retention);
        const double pulse = switching_duration(dev, current);
        OperatingPoint op{pulse, current, retention, 0};
        const DesignPoint* exact = anchor(retention);
        if (exact && exact->latency_cycles != 0 && clock_hz == ref_clock_)
            op.write_latency_cycles = exact->latency_cycles;
        else
            op.write_latency_cycles = units::seconds_to_cycles_ceil(pulse + overhead_, clock_hz);
        return op;
    }

    Cycle write_latency_cycles(double retention, double clock_hz) const {
        return operating_point(retention, clock_hz).write_latency_cycles;
    }

private:
    static bool same(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

    void check_range(double r) const {
        if (!(r > 0.0) || (r < min_retention() && !same(r, min_retention())) ||
            (r > max_retention() && !same(r, max_retention())))
            throw ConfigError("retention " + units::format_double(r) + " s outside the design table range [" +
                              units::format_double(min_retention()) + ", " +
                              units::format_double(max_retention()) + "] s");
    }

    const DesignPoint* anchor(double r) const {
        for (const auto& p : points_)
            if (same(p.retention, r)) return &p;
        return nullptr;
    }

    double interpolated_current(double r) const {
        if (const DesignPoint* p = anchor(r)) return *p->write_current;
        const double t1 = cal_.family.t1();
        const double d = delta_for_retention(r, t1);
        for (std::size_t i = 1; i < points_.size(); ++i) {
            if (r < points_[i].retention) {
                const double d0 = delta_for_retention(points_[i - 1].retention, t1);
                const double d1 = delta_for_retention(points_[i].retention, t1);
                const double w = (d - d0) / (d1 - d0);
                return *points_[i - 1].write_current + w * (*points_[i].write_current - *points_[i - 1].write_current);
            }
        }
        return *points_.back().write_current;
    }

    Cycle curve_cycles(double retention, double current, double clock_hz) const {
        const double pulse = switching_duration(cal_.family.at_retention(retention), current);
        return units::seconds_to_cycles_ceil(pulse + overhead_, clock_hz);
    }

    Calibration cal_;
    std::vector<DesignPoint> points_;
    double ref_clock_;
    double overhead_;
};

// LRSC designs 1-3 (140ms/10ms/1ms) and the 10-year HRSC cell, referenced to 3GHz.
inline DesignTable default_design_table() {
    const CalibrationInputs in;
    std::vector<DesignPoint> pts = {
        {"design3", 1e-3, 6, std::nullopt, true},
        {"design2", 10e-3, 7, in.low.current, true},
        {"design1", 140e-3, 12, std::nullopt, false},
        {"hrsc", 10.0 * units::kSecondsPerYear, 31, in.high.current, false},
    };
    return DesignTable(calibrate(in), std::move(pts), 3e9);
}

} // namespace rrap::device
