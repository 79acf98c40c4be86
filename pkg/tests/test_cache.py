import tempfile
import unittest
from pathlib import Path

from hamcount.cache import (
    CacheStore,
    cache_read,
    cache_write,
    make_record,
    open_cache,
    read_calibrations,
    record_key,
    write_calibration,
)
from hamcount.core import Composition, Pair, SameEndpoint
from hamcount.errors import UsageError
from hamcount.schemas import CacheKind, CacheRecord, CalibrationRecord, CountObject, CountQuery, Variant


S_5_7 = 3615532424230568640


class CacheTests(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.path = Path(self._tmp.name) / "cache.jsonl"

    def tearDown(self):
        self._tmp.cleanup()

    def test_store_round_trip(self):
        query = CountQuery.build(Composition.uniform(5, 7), CountObject.smirnov_total)
        with open_cache(self.path) as store:
            self.assertIsNone(store.get(query))
            store.put(query, S_5_7)
        self.assertEqual(CacheStore(self.path).get(query), S_5_7)
        self.assertIn('"3615532424230568640"', self.path.read_text())

    def test_missing_and_empty_files(self):
        self.assertEqual(cache_read(self.path), {})
        self.path.write_text("")
        self.assertEqual(cache_read(self.path), {})

    def test_corrupt_lines_are_skipped(self):
        good = make_record(CountQuery.build(Composition.of((2, 2)), CountObject.smirnov_total), 2)
        lines = [
            good.model_dump_json(),
            '{"kind": "S", "parts": [3, 3], "value": "12x"}',
            "not json",
            '{"kind": "H", "parts": [3, 3], "value": "6", "note": "extra fields are fine"}',
        ]
        self.path.write_text("\n".join(lines) + "\n")
        with self.assertLogs("hamcount.cache", level="WARNING") as logs:
            records = cache_read(self.path)
        self.assertEqual(len(logs.output), 2)
        self.assertEqual(len(records), 2)
        self.assertEqual(records[("H", (3, 3), None)].count, 6)

    def test_undecodable_lines_are_skipped(self):
        good = make_record(CountQuery.build(Composition.of((2, 2)), CountObject.smirnov_total), 2)
        self.path.write_bytes(good.model_dump_json().encode() + b"\n\xff\xfe garbage\n")
        with self.assertLogs("hamcount.cache", level="WARNING") as logs:
            records = cache_read(self.path)
        self.assertEqual(len(records), 1)
        self.assertIn("not UTF-8", logs.output[0])

    def test_undecodable_calibration_lines_are_skipped(self):
        record = CalibrationRecord(m=3, n_low=4, n_high=7, c_m=-6.0, goldens={Variant.paper: 0.1})
        self.path.write_bytes(b"\xff\xfe\n" + record.model_dump_json().encode() + b"\n")
        with self.assertLogs("hamcount.cache", level="WARNING"):
            records = read_calibrations(self.path)
        self.assertEqual(list(records), [(3, 4, 7)])

    def test_unwritable_cache_keeps_the_computed_value(self):
        blocker = Path(self._tmp.name) / "blocker"
        blocker.write_text("")
        store = CacheStore(blocker / "cache.jsonl")
        query = CountQuery.build(Composition.of((2, 2)), CountObject.ham_cycles)
        store.put(query, 1)
        with self.assertLogs("hamcount.cache", level="WARNING"):
            store.flush()
        self.assertEqual(store.get(query), 1)

    def test_unreadable_cache_is_a_usage_error(self):
        self.path.mkdir()
        with self.assertRaises(UsageError):
            cache_read(self.path)

    def test_unwritable_results_file_is_a_usage_error(self):
        blocker = Path(self._tmp.name) / "blocker"
        blocker.write_text("")
        record = CalibrationRecord(m=3, n_low=4, n_high=7, c_m=-6.0, goldens={Variant.paper: 0.1})
        with self.assertRaises(UsageError):
            write_calibration(blocker / "results.jsonl", record)

    def test_newest_record_wins(self):
        old = CacheRecord(kind=CacheKind.H, parts=[2, 2, 2], value="15")
        new = CacheRecord(kind=CacheKind.H, parts=[2, 2, 2], value="16")
        cache_write(self.path, [old])
        cache_write(self.path, [new])
        self.assertEqual(cache_read(self.path)[("H", (2, 2, 2), None)].count, 16)

    def test_disabled_store(self):
        store = CacheStore(None)
        query = CountQuery.build(Composition.of((2, 2)), CountObject.ham_cycles)
        store.put(query, 1)
        self.assertIsNone(store.get(query))
        store.flush()


class RecordKeyTests(unittest.TestCase):
    def test_key_ignores_part_order(self):
        first = CountQuery.build(Composition.of((3, 1, 2)), CountObject.ham_cycles)
        second = CountQuery.build(Composition.of((1, 2, 3)), CountObject.ham_cycles)
        self.assertEqual(record_key(first), record_key(second))

    def test_endpoints_follow_sorted_parts(self):
        first = CountQuery.build(Composition.of((3, 1, 2)), CountObject.smirnov_endpoint, Pair(s=1, r=2))
        second = CountQuery.build(Composition.of((1, 2, 3)), CountObject.smirnov_endpoint, Pair(s=3, r=1))
        kind, parts, endpoints = record_key(first)
        self.assertEqual(kind, CacheKind.F)
        self.assertEqual(parts.parts, (1, 2, 3))
        self.assertEqual(endpoints, (3, 1))
        self.assertEqual(record_key(first), record_key(second))

    def test_cut_closure_is_an_endpoint_record(self):
        query = CountQuery.build(Composition.of((2, 1)), CountObject.cut_closure, SameEndpoint(s=2))
        kind, parts, endpoints = record_key(query)
        self.assertEqual(kind, CacheKind.F)
        self.assertEqual(parts.parts, (2, 2))
        self.assertEqual(endpoints[0], endpoints[1])


if __name__ == "__main__":
    unittest.main()
