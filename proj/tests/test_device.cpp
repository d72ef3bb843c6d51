#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "common.hpp"

using namespace rrap;
using namespace rrap::device;

TEST(Device, RetentionRoundTrip) {
    const double t1 = 1e-9;
    for (int i = 0; i <= 600; ++i) {
        const double delta = i * 0.1;
        const double t = retention_time(delta, t1);
        const double back = delta_for_retention(t, t1);
        if (delta == 0.0) EXPECT_NEAR(back, 0.0, 1e-12);
        else EXPECT_NEAR(back, delta, 1e-12 * delta);
        EXPECT_NEAR(retention_time(back, t1), t, 1e-12 * t);
    }
}

TEST(Device, RetentionRejectsNonPositive) {
    EXPECT_THROW(retention_time(1.0, 0.0), std::domain_error);
    EXPECT_THROW(delta_for_retention(0.0, 1e-9), std::domain_error);
}

TEST(Device, ThermalBarrierFormula) {
    MtjDevice d = default_design_table().calibration().family.reference();
    EXPECT_DOUBLE_EQ(thermal_barrier(d), d.saturation_magnetization * d.anisotropy_field * d.free_layer_volume /
                                             d.temperature);
    d.temperature = 0;
    EXPECT_THROW(thermal_barrier(d), std::domain_error);
}

TEST(Device, CriticalCurrentFormula) {
    const MtjDevice d = default_design_table().calibration().family.reference();
    const double expected = 2 * d.damping * d.gyromagnetic_constant * d.electron_charge /
                            (d.bohr_magneton * d.polarization_efficiency) * d.barrier_energy;
    EXPECT_NEAR(critical_current(d), expected, 1e-12 * expected);
}

TEST(Device, CalibrationHitsBothPoints) {
    const CalibrationInputs in;
    const auto table = default_design_table();
    const auto& fam = table.calibration().family;
    for (const auto& pt : {in.low, in.high}) {
        const double i = write_current_for_pulse(fam.at_retention(pt.retention), pt.pulse_width);
        EXPECT_LT(std::abs(i - pt.current) / pt.current, 0.10);
        EXPECT_NEAR(switching_duration(fam.at_retention(pt.retention), pt.current), pt.pulse_width,
                    1e-9 * pt.pulse_width);
    }
    EXPECT_LT(table.calibration().low_residual, 0.10);
    EXPECT_LT(table.calibration().high_residual, 0.10);
}

TEST(Device, DesignTableLatenciesAt3GHz) {
    const auto t = default_design_table();
    EXPECT_EQ(t.write_latency_cycles(1e-3, 3e9), 6u);
    EXPECT_EQ(t.write_latency_cycles(10e-3, 3e9), 7u);
    EXPECT_EQ(t.write_latency_cycles(140e-3, 3e9), 12u);
    EXPECT_EQ(t.write_latency_cycles(10 * units::kSecondsPerYear, 3e9), 31u);
}

TEST(Device, DesignLatenciesFollowTheCurve) {
    // Independent of the table's stored cycles: pulse from the fitted
    // current plus the fixed peripheral overhead, rounded up.
    const auto t = default_design_table();
    for (const auto& p : t.points()) {
        const auto op = t.operating_point(p.retention, 3e9);
        const double pulse = switching_duration(t.calibration().family.at_retention(p.retention), op.write_current);
        EXPECT_EQ(units::seconds_to_cycles_ceil(pulse + kPeripheralWriteOverhead, 3e9), p.latency_cycles) << p.name;
    }
}

TEST(Device, BuiltinPresetsCarryDesignLatencies) {
    EXPECT_EQ(builtin_config("rrap-design3").lrsc.tech.write_latency_cycles, 6u);
    EXPECT_EQ(builtin_config("rrap").lrsc.tech.write_latency_cycles, 7u);
    EXPECT_EQ(builtin_config("rrap-design1").lrsc.tech.write_latency_cycles, 12u);
}

TEST(Device, InterpolatedRetentionIsMonotone) {
    const auto t = default_design_table();
    Cycle prev = 0;
    for (double r : {1e-3, 2e-3, 5e-3, 10e-3, 40e-3, 140e-3}) {
        const Cycle c = t.write_latency_cycles(r, 3e9);
        EXPECT_GE(c, prev) << r;
        prev = c;
    }
}

TEST(Device, RetentionOutsideTableRejected) {
    const auto t = default_design_table();
    EXPECT_THROW(t.write_latency_cycles(1e-4, 3e9), ConfigError);
}

TEST(Device, BelowCriticalCurrentIsOutOfScope) {
    const MtjDevice d = default_design_table().calibration().family.at_retention(10e-3);
    EXPECT_THROW(switching_duration(d, 0.5 * critical_current(d)), RegimeError);
}

TEST(Device, ShorterRetentionSwitchesFaster) {
    const auto fam = default_design_table().calibration().family;
    const double i = 90e-6;
    EXPECT_LT(switching_duration(fam.at_retention(1e-3), i), switching_duration(fam.at_retention(10e-3), i));
    EXPECT_LT(switching_duration(fam.at_retention(10e-3), i), switching_duration(fam.at_retention(140e-3), i));
}
