from itertools import product

import pytest

from cellforge.cells import (
    BUILTIN_CELLS,
    CellSpec,
    GdiConfig,
    TruthFunction,
    builtin_cell,
    cmos28_reference_adder,
    gdi_cell,
    golden_full_adder,
    proposed_gdi_adder,
    proposed_ptl_gdi_adder,
    ptl_xor2,
)
from cellforge.netlist import count_transistors


def majority(a, b, c):
    return 1 if a + b + c >= 2 else 0


class TestGoldenFullAdder:
    def test_paper_walkthrough_101(self):
        assert golden_full_adder(1, 0, 1) == (0, 1)

    def test_hand_evaluated_011(self):
        # H = 0 xor 1 = 1, so carry follows cin = 1; sum = 1 xor 1 = 0
        assert golden_full_adder(0, 1, 1) == (0, 1)

    def test_simple_001(self):
        assert golden_full_adder(0, 0, 1) == (1, 0)

    def test_equals_arithmetic_on_all_rows(self):
        for a, b, c in product((0, 1), repeat=3):
            s, cy = golden_full_adder(a, b, c)
            assert s == (a + b + c) % 2
            assert cy == (a + b + c) // 2

    def test_carry_identity_equals_majority(self):
        # H'A + H*Cin == majority(A, B, Cin), brute forced
        for a, b, c in product((0, 1), repeat=3):
            h = a ^ b
            assert ((1 - h) * a + h * c) == majority(a, b, c)


class TestGdiCell:
    @pytest.mark.parametrize(
        "cfg,expected",
        [
            (GdiConfig(g="A", p="B", n=1), lambda a, b: a | b),          # OR
            (GdiConfig(g="A", p=0, n="B"), lambda a, b: a & b),          # AND
            (GdiConfig(g="A", p="B", n=0), lambda a, b: (1 - a) & b),    # F1
            (GdiConfig(g="A", p=1, n="B"), lambda a, b: (1 - a) | b),    # F2
        ],
    )
    def test_table_rows_two_vars(self, cfg, expected):
        spec = gdi_cell(cfg)
        for a, b in product((0, 1), repeat=2):
            assert spec.golden["out"](a, b) == expected(a, b)

    def test_mux_row(self):
        spec = gdi_cell(GdiConfig(g="A", p="B", n="C"))
        for a, b, c in product((0, 1), repeat=3):
            assert spec.golden["out"](a, b, c) == ((1 - a) & b) | (a & c)

    def test_mux_law_holds_for_every_config(self):
        # out == G*N + G'*P for all assignments of variables/constants
        choices = ["A", "B", "C", 0, 1]
        for g, p, n in product(choices, repeat=3):
            if not any(isinstance(v, str) for v in (g, p, n)):
                continue
            cfg = GdiConfig(g=g, p=p, n=n)
            spec = gdi_cell(cfg)
            variables = cfg.variables
            for bits in product((0, 1), repeat=len(variables)):
                env = dict(zip(variables, bits))
                val = lambda v: env[v] if isinstance(v, str) else v
                expected = val(n) if val(g) else val(p)
                assert spec.golden["out"](*bits) == expected

    def test_two_transistors_with_gdi_bulks(self):
        spec = gdi_cell(GdiConfig(g="A", p="B", n="C"))
        tc = count_transistors(spec.circuit)
        assert (tc.nmos, tc.pmos, tc.total) == (1, 1, 2)
        pmos = next(m for m in spec.circuit.mosfets if m.polarity == "PMOS")
        nmos = next(m for m in spec.circuit.mosfets if m.polarity == "NMOS")
        assert pmos.bulk == pmos.source  # bulk tied to P input
        assert nmos.bulk == nmos.source  # bulk tied to N input

    def test_all_constant_config_rejected(self):
        with pytest.raises(ValueError):
            GdiConfig(g=1, p=0, n=1)


class TestPtlXor2:
    def test_truth_function(self):
        spec = ptl_xor2()
        assert spec.golden["out"](1, 0) == 1
        assert spec.golden["out"](1, 1) == 0
        assert spec.golden["out"](0, 0) == 0
        assert spec.golden["out"](0, 1) == 1

    def test_two_pmos_two_nmos(self):
        tc = count_transistors(ptl_xor2().circuit)
        assert (tc.nmos, tc.pmos) == (2, 2)


class TestProposedAdders:
    @pytest.mark.parametrize("factory", [proposed_ptl_gdi_adder, proposed_gdi_adder])
    def test_table2_counts(self, factory):
        tc = count_transistors(factory().circuit)
        assert (tc.nmos, tc.pmos, tc.total) == (5, 5, 10)

    @pytest.mark.parametrize("factory", [proposed_ptl_gdi_adder, proposed_gdi_adder])
    def test_golden_functions(self, factory):
        spec = factory()
        assert spec.golden["sum"](1, 0, 1) == 0
        assert spec.golden["carry"](1, 0, 1) == 1
        assert spec.golden["sum"](0, 0, 0) == 0
        assert spec.golden["carry"](0, 0, 0) == 0
        assert spec.golden["sum"](1, 1, 1) == 1
        assert spec.golden["carry"](1, 1, 1) == 1

    def test_ptl_gdi_carry_wiring_follows_prose(self):
        # gate <- h, PMOS source <- a, NMOS source <- cin
        circuit = proposed_ptl_gdi_adder().circuit
        mpc = circuit.mosfet("MPc")
        mnc = circuit.mosfet("MNc")
        assert mpc.gate == "h" and mpc.source == "a"
        assert mnc.gate == "h" and mnc.source == "cin"

    def test_golden_sum_is_parity_carry_is_majority(self):
        for factory in (proposed_ptl_gdi_adder, proposed_gdi_adder,
                        cmos28_reference_adder):
            spec = factory()
            for bits in product((0, 1), repeat=3):
                assert spec.golden["sum"](*bits) == sum(bits) % 2
                assert spec.golden["carry"](*bits) == majority(*bits)


class TestCmos28:
    def test_transistor_count(self):
        tc = count_transistors(cmos28_reference_adder().circuit)
        assert tc.total == 28
        assert tc.nmos == tc.pmos == 14

    def test_full_adder_row(self):
        spec = cmos28_reference_adder()
        assert spec.golden["sum"](1, 0, 1) == 0
        assert spec.golden["carry"](1, 0, 1) == 1

    def test_carry_is_majority_all_rows(self):
        spec = cmos28_reference_adder()
        for bits in product((0, 1), repeat=3):
            assert spec.golden["carry"](*bits) == majority(*bits)


class TestRegistry:
    def test_builtin_lookup(self):
        spec = builtin_cell("proposed-gdi")
        assert isinstance(spec, CellSpec)
        assert spec.name == "proposed-gdi"

    def test_unknown_name(self):
        with pytest.raises(KeyError, match="unknown cell"):
            builtin_cell("nonsense")

    def test_every_builtin_has_goldens_for_all_outputs(self):
        for name, factory in BUILTIN_CELLS.items():
            spec = factory()
            assert set(spec.golden) == set(spec.outputs), name


class TestTruthFunction:
    def test_must_be_total(self):
        with pytest.raises(ValueError, match="total"):
            TruthFunction(2, {(0, 0): 0})

    def test_from_callable_and_call(self):
        fn = TruthFunction.from_callable(2, lambda a, b: a ^ b)
        assert fn(1, 0) == 1 and fn(1, 1) == 0
