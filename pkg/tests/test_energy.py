"""Energy constants, ledger accounting, and report assembly."""

import json
import math

import pytest

from ibetrust import energy
from ibetrust.errors import ConfigError


class TestConstants:
    def test_default_power(self):
        assert energy.DEFAULT_CONSTANTS.power_w == pytest.approx(0.072)

    def test_derived_process_energies(self):
        c = energy.DEFAULT_CONSTANTS
        assert c.e_boot == pytest.approx(4.248e-3)
        assert c.e_encrypt_block == pytest.approx(3.6e-3)
        assert c.e_sha2 == pytest.approx(3.6e-3)
        assert c.e_switch == pytest.approx(16.56e-3)
        assert c.e_pairing == pytest.approx(0.2916)

    def test_negative_rejected(self):
        with pytest.raises(ConfigError):
            energy.EnergyConstants(boot_s=-1)

    def test_from_file(self, tmp_path):
        path = tmp_path / "constants.json"
        path.write_text(json.dumps({"current": 0.030, "battery_j": 500}))
        c = energy.EnergyConstants.from_file(path)
        assert c.power_w == pytest.approx(0.108)
        assert c.battery_j == 500
        assert c.boot_s == 0.059  # untouched defaults remain

    def test_from_file_unknown_key(self, tmp_path):
        path = tmp_path / "constants.json"
        path.write_text(json.dumps({"wattage": 1}))
        with pytest.raises(ConfigError, match="wattage"):
            energy.EnergyConstants.from_file(path)

    def test_from_file_not_object(self, tmp_path):
        path = tmp_path / "constants.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError):
            energy.EnergyConstants.from_file(path)


class TestFormulas:
    def test_joules(self):
        assert energy.joules(0.072, 0.059) == pytest.approx(4.248e-3)
        assert energy.joules(0.072, 0.23) == pytest.approx(16.56e-3)
        assert energy.joules(0.072, 4.05) == pytest.approx(0.2916)
        assert energy.joules(0, 5) == 0

    def test_joules_rejects_negative(self):
        with pytest.raises(ValueError):
            energy.joules(-1, 1)
        with pytest.raises(ValueError):
            energy.joules(1, -1)

    def test_e_comm_legs(self):
        assert energy.e_comm(319, 0) == pytest.approx(583.77e-6)
        assert energy.e_comm(0, 480) == pytest.approx(950.4e-6)
        assert energy.e_comm(85, 0) == pytest.approx(155.55e-6)
        assert energy.e_comm(319, 480) == pytest.approx(583.77e-6 + 950.4e-6)

    def test_e_total_calibrated_reading(self):
        total = energy.e_total(1, 1, 160, 319, 480)
        assert total == pytest.approx(25.94217e-3)
        assert total < 0.01 * energy.DEFAULT_CONSTANTS.battery_j

    def test_e_total_zero(self):
        assert energy.e_total(0, 0, 0, 0, 0) == 0

    def test_fractional_airtime(self):
        assert energy.fractional_airtime(400) == pytest.approx(479.245283)
        assert round(energy.fractional_airtime(400), 2) == 479.25
        assert energy.fractional_airtime(106) == pytest.approx(127)
        assert energy.fractional_airtime(0) == 0
        with pytest.raises(ValueError):
            energy.fractional_airtime(-1)

    def test_framed_airtime(self):
        assert energy.framed_airtime(400) == 484
        assert energy.framed_airtime(106) == 127
        assert energy.framed_airtime(107) == 107 + 42
        with pytest.raises(ValueError):
            energy.framed_airtime(-1)


class TestLedger:
    def test_accumulation(self):
        led = energy.EnergyLedger("node-001")
        led.add(0, "boot", 4.248e-3)
        led.add(1, "tx", 583.77e-6, note="ta-request", quantity=319)
        led.add(2, "tx", 155.55e-6, note="ake", quantity=85)
        assert led.category_total("boot") == pytest.approx(4.248e-3)
        assert led.category_total("tx") == pytest.approx(739.32e-6)
        assert led.category_total("rx") == 0

    def test_conservation_exact(self):
        led = energy.EnergyLedger("n")
        amounts = [0.1, 0.2, 0.3, 1e-9, 4.248e-3, 16.56e-3, 22.5e-6]
        cats = ["boot", "switch", "encrypt", "pairing", "sha2", "tx", "rx"]
        for i, (a, c) in enumerate(zip(amounts, cats)):
            led.add(i, c, a)
            led.add(i, c, a / 3)
        assert led.grand_total() == math.fsum(e.joules for e in led.events)
        assert led.grand_total() == math.fsum(led.by_category().values())

    def test_rejects_unknown_category(self):
        led = energy.EnergyLedger("n")
        with pytest.raises(ValueError):
            led.add(0, "gpu", 1.0)
        with pytest.raises(ValueError):
            led.category_total("gpu")

    def test_rejects_negative_energy(self):
        led = energy.EnergyLedger("n")
        with pytest.raises(ValueError):
            led.add(0, "tx", -1.0)

    def test_totals_by_note(self):
        led = energy.EnergyLedger("n")
        led.add(0, "tx", 1e-6, note="ta-request", quantity=100)
        led.add(1, "tx", 2e-6, note="ta-request", quantity=200)
        led.add(2, "tx", 5e-6, note="ake", quantity=85)
        by_note = led.totals_by_note("tx")
        assert by_note["ta-request"] == (pytest.approx(3e-6), 300)
        assert by_note["ake"] == (pytest.approx(5e-6), 85)


class TestReport:
    def _ledgers(self):
        led = energy.EnergyLedger("node-001")
        led.add(0, "boot", energy.DEFAULT_CONSTANTS.e_boot, note="dy-boot")
        led.add(1, "switch", energy.DEFAULT_CONSTANTS.e_switch)
        led.add(2, "encrypt", 128 * 22.5e-6, note="ta", quantity=128)
        led.add(3, "tx", energy.e_comm(117, 0), note="ta-request", quantity=117)
        led.add(4, "rx", energy.e_comm(0, 127), note="ta-ack", quantity=127)
        led.add(5, "tx", energy.e_comm(93, 0), note="ake", quantity=93)
        led.add(6, "pairing", energy.DEFAULT_CONSTANTS.e_pairing)
        return {"node-001": led}

    def test_nominal_rows(self):
        report = energy.build_report(self._ledgers())
        rows = {name: (b, j) for name, b, j in report.nominal_rows}
        assert rows["ta request tx"] == (319, pytest.approx(583.77e-6))
        assert rows["ta ack rx"] == (480, pytest.approx(950.4e-6))
        assert rows["ake tx"] == (85, pytest.approx(155.55e-6))
        assert report.nominal_ta_total_j == pytest.approx(25.94217e-3)

    def test_ta_totals_exclude_pairing_and_ake(self):
        report = energy.build_report(self._ledgers())
        led = self._ledgers()["node-001"]
        expected = (
            led.category_total("boot")
            + led.category_total("switch")
            + led.category_total("encrypt")
            + energy.e_comm(117, 127)
        )
        assert report.ta_totals["node-001"] == pytest.approx(expected)

    def test_trustid_sizing(self):
        report = energy.build_report({}, trusted_count=200)
        assert report.trustid_payload_bytes == 400
        assert round(report.trustid_fractional_airtime, 2) == 479.25
        assert report.trustid_framed_airtime == 484

    def test_empty_simulation(self):
        report = energy.build_report({})
        assert report.comm_rows == []
        assert report.ta_totals == {}
        text = energy.render_text(report)
        assert "per-process energy" in text

    def test_render_deterministic(self):
        a = energy.render_text(energy.build_report(self._ledgers()))
        b = energy.render_text(energy.build_report(self._ledgers()))
        assert a == b
        assert "node-001" in a
        assert "RRUAN" in a

    def test_csv_parses_back(self):
        import csv
        import io

        out = energy.render_csv(energy.build_report(self._ledgers(), trusted_count=3))
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["section", "name", "field", "value"]
        sections = {r[0] for r in rows[1:]}
        assert {"process", "comm", "nominal", "node", "comparison", "trustid"} <= sections
