import itertools
import unittest
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from unittest import mock

from hamcount import counting
from hamcount.core import Composition, SameEndpoint, compositions, factorial
from hamcount.counting import (
    MemoTable,
    admissible_word_count,
    choose_strategy,
    circular_positioned_count,
    cut_sum,
    directed_cycles_from_circular,
    evaluate,
    f_endpoint_closed,
    f_endpoint_recurrence,
    f_same_endpoint_closure,
    hamiltonian_cycles,
    hamiltonian_cycles_directed,
    hamiltonian_paths,
    knuth_tripartite,
    necklace_count,
    cut_average,
    s_count,
)
from hamcount.errors import InconsistencyError, UsageError
from hamcount.oracle import count_ham_cycles_bruteforce
from hamcount.reports import benchmark, table_cell
from hamcount.schemas import CountObject, CountQuery, Quantity, Strategy


# rows m = 1..5, columns n = 1..7
SMIRNOV_TABLE = {
    1: [0, 0, 0, 0, 0, 0, 0],
    2: [2, 2, 2, 2, 2, 2, 2],
    3: [6, 24, 132, 804, 5196, 34872, 240288],
    4: [24, 744, 33960, 1820232, 106721784, 6627719256, 428434032456],
    5: [
        120,
        35160,
        16841160,
        9960343920,
        6633577962720,
        4768569352231680,
        3615532424230568640,
    ],
}

HAMILTONIAN_TABLE = {
    1: [0, 0, 0, 0, 0, 0, 0],
    2: [0, 1, 6, 72, 1440, 43200, 1814400],
    3: [1, 16, 1584, 463104, 299289600, 361552896000, 732443959296000],
    4: [
        3,
        744,
        1833840,
        18872165376,
        553245728256000,
        37106744352952320000,
        4936487939183251906560000,
    ],
    5: [
        12,
        56256,
        4365228672,
        1982761838641152,
        3301292943239086080000,
        15377981531746493634969600000,
        167968136055441465391083474124800000,
    ],
}


class EndpointCountTests(unittest.TestCase):
    def test_small_endpoint_counts(self):
        for count in (f_endpoint_closed, f_endpoint_recurrence):
            self.assertEqual(count(Composition.of((1, 1)), 1, 2), 1)
            self.assertEqual(count(Composition.of((3, 3)), 1, 2), 1)
            self.assertEqual(count(Composition.of((2, 2, 2)), 1, 2), 4)
            self.assertEqual(count(Composition.of((1, 1, 1)), 1, 1), 0)

    def test_single_color_words(self):
        for count in (f_endpoint_closed, f_endpoint_recurrence):
            self.assertEqual(count(Composition.of((1,)), 1, 1), 1)
            self.assertEqual(count(Composition.of((2,)), 1, 1), 0)
            self.assertEqual(count(Composition.of((5,)), 1, 1), 0)

    def test_strategies_agree_on_every_small_composition(self):
        for total in range(1, 8):
            for parts in compositions(total, 4):
                for s, r in itertools.product(range(1, parts.m + 1), repeat=2):
                    closed = f_endpoint_closed(parts, s, r)
                    self.assertEqual(closed, f_endpoint_recurrence(parts, s, r), (parts.parts, s, r))
                    self.assertEqual(closed, f_endpoint_closed(parts, r, s), (parts.parts, s, r))

    def test_strategies_agree_up_to_twelve_letters(self):
        memo = MemoTable()
        for total in range(8, 13):
            for parts in compositions(total):
                if list(parts.parts) != sorted(parts.parts, reverse=True):
                    continue
                for s, r in itertools.product(range(1, parts.m + 1), repeat=2):
                    self.assertEqual(
                        f_endpoint_closed(parts, s, r),
                        f_endpoint_recurrence(parts, s, r, memo=memo),
                        (parts.parts, s, r),
                    )

    def test_invalid_color(self):
        with self.assertRaises(UsageError):
            f_endpoint_closed(Composition.of((1, 1, 1)), 4, 1)
        with self.assertRaises(UsageError):
            f_endpoint_recurrence(Composition.of((1, 1, 1)), 0, 1)


class TableTests(unittest.TestCase):
    def test_smirnov_table(self):
        for m, row in SMIRNOV_TABLE.items():
            for n, expected in enumerate(row, 1):
                parts = Composition.uniform(m, n)
                self.assertEqual(s_count(parts, Strategy.closed), expected, (m, n))
                self.assertEqual(s_count(parts, Strategy.recurrence), expected, (m, n))

    def test_hamiltonian_table(self):
        for m, row in HAMILTONIAN_TABLE.items():
            for n, expected in enumerate(row, 1):
                self.assertEqual(hamiltonian_cycles(Composition.uniform(m, n)), expected, (m, n))

    def test_small_known_values(self):
        self.assertEqual(s_count(Composition.of((1, 1, 1))), 6)
        self.assertEqual(s_count(Composition.of((2, 2, 2, 2))), 744)
        self.assertEqual(admissible_word_count(Composition.of((3, 3))), 72)
        self.assertEqual(admissible_word_count(Composition.of((2, 2, 2))), 192)
        self.assertEqual(hamiltonian_cycles(Composition.of((1, 1, 2))), 1)
        self.assertEqual(hamiltonian_cycles(Composition.of((4, 4))), 72)
        self.assertEqual(hamiltonian_cycles_directed(Composition.of((2, 2, 2))), 32)
        self.assertEqual(hamiltonian_cycles_directed(Composition.of((1, 1, 1))), 2)
        self.assertEqual(hamiltonian_cycles_directed(Composition.of((1, 1))), 0)
        self.assertEqual(hamiltonian_paths(Composition.of((1, 1))), 2)
        self.assertEqual(hamiltonian_paths(Composition.of((2, 2))), 8)
        self.assertEqual(hamiltonian_paths(Composition.of((2, 2, 2))), 192)

    def test_nonuniform_counts_do_not_depend_on_part_order(self):
        for parts in (Composition.of((1, 2, 3)), Composition.of((2, 3, 3, 4))):
            expected = s_count(parts)
            for order in itertools.permutations(range(1, parts.m + 1)):
                self.assertEqual(s_count(parts.permuted(order)), expected)


class ClassicalIdentityTests(unittest.TestCase):
    def test_complete_graphs(self):
        for m in range(3, 9):
            self.assertEqual(hamiltonian_cycles(Composition.uniform(m, 1)), factorial(m - 1) // 2)

    def test_complete_bipartite(self):
        for n in range(2, 8):
            self.assertEqual(
                hamiltonian_cycles(Composition.uniform(2, n)),
                factorial(n) ** 2 // (2 * n),
            )

    def test_tripartite_sweep_matches_graph_search(self):
        brute = {}
        for p, q, r in itertools.product(range(1, 8), repeat=3):
            if p + q + r > 9:
                continue
            key = tuple(sorted((p, q, r)))
            if key not in brute:
                brute[key] = count_ham_cycles_bruteforce(Composition.of(key))
            self.assertEqual(knuth_tripartite(p, q, r), brute[key], (p, q, r))
        self.assertEqual(knuth_tripartite(1, 1, 1), 1)
        self.assertEqual(knuth_tripartite(1, 1, 2), 1)
        self.assertEqual(knuth_tripartite(2, 2, 2), 16)

    def test_divisibility_failure_is_reported(self):
        with mock.patch("hamcount.counting.cycle_divisor", lambda total: 2 * total + 1):
            with self.assertRaises(InconsistencyError):
                hamiltonian_cycles(Composition.of((2, 2, 2)))


class CircularTests(unittest.TestCase):
    def test_cut_closure_examples(self):
        pair = Composition.of((1, 1))
        self.assertEqual(f_same_endpoint_closure(pair, 1), 1)
        self.assertEqual(f_same_endpoint_closure(pair, 2), 1)
        self.assertEqual(cut_sum(Composition.of((2, 2, 2))), 24)

    def test_cut_sum_matches_positioned_count(self):
        for total in range(2, 9):
            for parts in compositions(total, 4):
                self.assertEqual(cut_sum(parts), s_count(parts), parts.parts)
                self.assertEqual(circular_positioned_count(parts, cross_check=True), s_count(parts))

    def test_positioned_and_necklace_examples(self):
        self.assertEqual(circular_positioned_count(Composition.of((1, 1))), 2)
        self.assertEqual(circular_positioned_count(Composition.of((2, 2))), 2)
        self.assertEqual(circular_positioned_count(Composition.of((2, 2, 2))), 24)
        self.assertEqual(necklace_count(Composition.of((1, 1))), 1)
        self.assertEqual(necklace_count(Composition.of((2, 2))), 1)
        self.assertEqual(necklace_count(Composition.of((1, 1, 1))), 2)

    def test_cut_average_differs_on_symmetric_words(self):
        parts = Composition.of((2, 2))
        self.assertEqual(cut_average(parts), Fraction(1, 2))
        self.assertEqual(necklace_count(parts), 1)
        self.assertEqual(cut_average(Composition.of((1, 1, 1))), Fraction(2))

    def test_directed_cycles_from_circular(self):
        for parts in (Composition.of((1, 1, 1)), Composition.of((2, 2, 2)), Composition.of((1, 2, 3))):
            self.assertEqual(directed_cycles_from_circular(parts), hamiltonian_cycles_directed(parts))

    def test_cyclic_counts_need_two_letters(self):
        with self.assertRaises(UsageError):
            necklace_count(Composition.of((1,)))
        with self.assertRaises(UsageError):
            circular_positioned_count(Composition.of((1,)))


class StrategyTests(unittest.TestCase):
    def test_auto_strategy_switches_on_summand_count(self):
        self.assertEqual(choose_strategy(Composition.uniform(3, 3)), Strategy.closed)
        self.assertEqual(choose_strategy(Composition.uniform(8, 8)), Strategy.recurrence)
        self.assertEqual(choose_strategy(Composition.uniform(3, 3), Strategy.recurrence), Strategy.recurrence)

    def test_memo_table_is_write_once(self):
        table = MemoTable()
        self.assertEqual(table.put((1, None, ()), 5), 5)
        self.assertEqual(table.put((1, None, ()), 7), 5)
        self.assertEqual(len(table), 1)
        table.clear()
        self.assertEqual(len(table), 0)

    def test_private_memo_gives_same_values(self):
        table = MemoTable()
        parts = Composition.of((2, 3, 4))
        self.assertEqual(
            f_endpoint_recurrence(parts, 1, 3, memo=table),
            f_endpoint_closed(parts, 1, 3),
        )
        self.assertGreater(len(table), 0)

    def test_concurrent_calls_match_serial(self):
        counting.clear_memo()
        cases = [Composition.uniform(m, n) for m in (3, 4) for n in range(1, 6)]
        serial = [s_count(parts, Strategy.closed) for parts in cases]
        counting.clear_memo()
        with ThreadPoolExecutor(max_workers=4) as pool:
            threaded = list(pool.map(lambda parts: s_count(parts, Strategy.recurrence), cases))
        self.assertEqual(threaded, serial)
        self.assertGreater(counting.memo_size(), 0)

    def test_private_memo_leaves_the_shared_table_alone(self):
        counting.clear_memo()
        table = MemoTable()
        parts = Composition.uniform(4, 3)
        self.assertEqual(hamiltonian_cycles(parts, Strategy.recurrence, table), HAMILTONIAN_TABLE[4][2])
        self.assertEqual(s_count(parts, Strategy.recurrence, table), SMIRNOV_TABLE[4][2])
        self.assertGreater(len(table), 0)
        self.assertEqual(counting.memo_size(), 0)

    def test_table_cells_and_benchmark_use_private_memos(self):
        counting.clear_memo()
        self.assertEqual(
            table_cell((Quantity.H, 4, 3, Strategy.recurrence)),
            (4, 3, str(HAMILTONIAN_TABLE[4][2])),
        )
        frame = benchmark([3], [4])
        self.assertTrue(frame["agree"].all())
        self.assertEqual(counting.memo_size(), 0)


class EvaluateTests(unittest.TestCase):
    def test_queries(self):
        parts = Composition.of((2, 2, 2))
        self.assertEqual(evaluate(CountQuery.build(parts, CountObject.ham_cycles)), 16)
        self.assertEqual(evaluate(CountQuery.build(parts, CountObject.smirnov_total)), 24)
        self.assertEqual(evaluate(CountQuery.build(parts, CountObject.necklaces)), necklace_count(parts))
        closure = CountQuery.build(parts, CountObject.cut_closure, SameEndpoint(s=1))
        self.assertEqual(evaluate(closure), f_same_endpoint_closure(parts, 1))

    def test_invalid_queries(self):
        with self.assertRaises(UsageError):
            CountQuery.build(Composition.of((2, 2)), CountObject.smirnov_endpoint)
        with self.assertRaises(UsageError):
            CountQuery.build(Composition.of((1,)), CountObject.necklaces)
        with self.assertRaises(UsageError):
            CountQuery.build(Composition.of((2, 2)), CountObject.cut_closure, SameEndpoint(s=3))


if __name__ == "__main__":
    unittest.main()
