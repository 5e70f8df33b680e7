"""
Test suite for the command-line front end
"""

import json
import pytest
import sys
import os

# Add the src directory to the Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from cli import EXIT_MODEL, EXIT_OK, EXIT_USAGE, main, parse_array
from errors import ConfigurationError
from reports import read_table


class TestParseArray:

    def test_accepted_names(self):
        assert parse_array('64') == 64
        assert parse_array('16x16') == 16
        assert parse_array(' 128X128 ') == 128

    def test_suggestion(self):
        with pytest.raises(ConfigurationError) as exc:
            parse_array('64x65')
        assert 'did you mean' in str(exc.value)

    def test_non_square_rejected(self):
        with pytest.raises(ConfigurationError):
            parse_array('16x32')


class TestGen:

    def test_baseline_counts(self, capsys):
        assert main(['gen', '--alpha', '1', '--rho', '1', '--g', '1']) == EXIT_OK
        assert capsys.readouterr().out.strip() == 'MACs: 569M, Params: 4.21M'

    def test_group_size_32(self, capsys):
        assert main(['gen', '--g', '32']) == EXIT_OK
        assert capsys.readouterr().out.strip() == 'MACs: 1108M, Params: 5.59M'

    def test_non_dividing_group(self, capsys):
        assert main(['gen', '--g', '3']) == EXIT_MODEL
        assert 'does not divide' in capsys.readouterr().err

    def test_writes_descriptor(self, tmp_path):
        out = tmp_path / 'net.json'
        assert main(['gen', '--g', '4', '--out', str(out)]) == EXIT_OK
        payload = json.loads(out.read_text())
        assert payload['group_size'] == 4
        assert len(payload['layers']) == 29

    def test_counts_table(self, tmp_path):
        out = tmp_path / 'counts.csv'
        assert main(['gen', '--table', str(out)]) == EXIT_OK
        config, frame = read_table(str(out))
        assert config['network'] == 'mobilenet_v1_a1_r1_g1'
        assert len(frame) == 29
        assert frame['macs'].sum() == 568_740_352
        assert frame['params'].sum() == 4_209_088
        assert frame.loc[1, 'a_reu'] == pytest.approx(4.5)

        _, kinds = read_table(str(tmp_path / 'counts_kinds.csv'))
        by_kind = dict(zip(kinds['kind'], kinds['macs']))
        assert by_kind['grouped_conv'] == 17_385_984
        assert by_kind['pointwise_conv'] == 539_492_352
        assert by_kind['network'] == 568_740_352

    def test_half_width_prints_scaling_rule(self, capsys):
        assert main(['gen', '--alpha', '0.5']) == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines == ['MACs: 149M, Params: 1.32M',
                         'Scaling rule: MACs: 147M, Params: 1.82M']


class TestAnalyze:

    def test_empty_network(self, tmp_path, capsys):
        path = tmp_path / 'empty.json'
        path.write_text(json.dumps({'name': 'empty', 'layers': []}))
        assert main(['analyze', str(path)]) == EXIT_MODEL
        assert 'no layers' in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(['analyze', str(tmp_path / 'absent.json')]) == EXIT_MODEL

    def test_unknown_array(self, tmp_path):
        net = tmp_path / 'net.json'
        main(['gen', '--out', str(net)])
        assert main(['analyze', str(net), '--array', '48']) == EXIT_USAGE

    def test_writes_reports(self, tmp_path):
        net = tmp_path / 'net.json'
        prefix = str(tmp_path / 'base')
        assert main(['gen', '--out', str(net)]) == EXIT_OK
        assert main(['analyze', str(net), '--array', '16x16', '--out-prefix', prefix]) == EXIT_OK

        config, mapping = read_table(f"{prefix}_mapping.csv")
        assert len(mapping) == 29
        assert config['command'] == 'analyze'
        _, cost = read_table(f"{prefix}_cost.csv")
        assert list(cost['layer'])[:2] == ['conv1', mapping['layer'][1]]

        with open(f"{prefix}_summary.json") as f:
            summary = json.load(f)['summary']
        assert summary['layers'] == 29
        assert summary['avg_utilization'] == pytest.approx(0.5942798132, abs=1e-9)

    def test_json_format(self, tmp_path):
        net = tmp_path / 'net.json'
        prefix = str(tmp_path / 'base')
        main(['gen', '--out', str(net)])
        assert main(['analyze', str(net), '--array', '32', '--out-prefix', prefix,
                     '--format', 'json']) == EXIT_OK
        with open(f"{prefix}_cost.json") as f:
            payload = json.load(f)
        assert len(payload['rows']) == 29
        assert payload['config']['array_config']['rows'] == 32


class TestSweepAndReport:

    def test_sweep_rows_and_determinism(self, tmp_path, capsys):
        first, second = tmp_path / 'a.csv', tmp_path / 'b.csv'
        argv = ['sweep', '--arrays', '16,32,64,128', '--g', '1,2,4,8,16,32',
                '--alpha', '1', '--rho', '1']
        assert main(argv + ['--out', str(first)]) == EXIT_OK
        assert f"24 rows evaluated, 0 skipped -> {first}" in capsys.readouterr().out
        assert main(argv + ['--out', str(second)]) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()

        _, frame = read_table(str(first))
        assert len(frame) == 24
        assert list(frame['array_side'].unique()) == [16, 32, 64, 128]

    def test_sweep_reports_skips(self, tmp_path, capsys):
        out = tmp_path / 'sweep.csv'
        assert main(['sweep', '--arrays', '16', '--g', '1,7', '--out', str(out)]) == EXIT_OK
        printed = capsys.readouterr().out
        assert 'skipped 16x16 alpha=1 rho=1 G=7' in printed
        assert '1 rows evaluated, 1 skipped' in printed

    def test_report_on_partial_sweep(self, tmp_path, capsys):
        sweep = tmp_path / 'sweep.csv'
        main(['sweep', '--arrays', '16', '--g', '1,2', '--out', str(sweep)])
        capsys.readouterr()
        assert main(['report', str(sweep)]) == EXIT_OK
        assert capsys.readouterr().out.split() == [
            'T1:', 'not_evaluable', 'T2:', 'not_evaluable',
            'T3:', 'not_evaluable', 'T4:', 'not_evaluable',
        ]
        with open(tmp_path / 'sweep_report.json') as f:
            payload = json.load(f)
        assert payload['comparison']['status'] == 'not_evaluable'
        assert payload['config']['sweep_config']['command'] == 'sweep'
        assert payload['alpha_invariance'] == {'tolerance': 0.02, 'max_spread': 0.0,
                                               'by_rho': {'rho=1': 0.0}}


class TestMisc:

    def test_defaults_table(self, capsys):
        assert main(['defaults']) == EXIT_OK
        out = capsys.readouterr().out
        assert 'clock_hz' in out
        assert 'dram_bytes_per_cycle' in out
        bandwidth = next(l for l in out.splitlines() if l.startswith('dram_bytes_per_cycle'))
        assert '[nominal 4 = 2 words/cycle]' in bandwidth

    def test_unknown_flag(self):
        assert main(['gen', '--bogus']) == EXIT_USAGE

    def test_missing_command(self):
        assert main([]) == EXIT_USAGE


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
