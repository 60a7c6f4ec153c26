"""
Tests for the pcg command line
"""

import pytest
import yaml

from src import cli
from src.cli import main
from src.models.bench import BenchSummary
from src.models.level import parse_level
from src.services.maze_domain import MAZE_ALPHABET

UNSOLVABLE = "4 4\n....\n####\n....\n....\n"
FLAT = "101 16\n" + ("-" * 101 + "\n") * 15 + "X" * 101 + "\n"


def _evolve(tmp_path, name='run', seed='0'):
    out = tmp_path / name
    code = main(['evolve', '--size', '4', '--threshold', '0.7', '--seed', seed, '--out', str(out)])
    return code, out


def test_evolve_writes_run(tmp_path, capsys):
    """Test that evolve saves levels, run.json and the resolved config."""
    code, out = _evolve(tmp_path)
    assert code == 0
    assert len(list((out / 'initial').glob('*.lvl'))) == 50
    assert len(list((out / 'final').glob('*.lvl'))) >= 1
    assert (out / 'run.json').is_file()
    resolved = yaml.safe_load((out / 'config.yaml').read_text())
    assert resolved['size'] == [4]
    assert resolved['threshold'] == 0.7
    assert resolved['population_size'] == 50
    printed = capsys.readouterr().out
    assert "generations:" in printed and "wall_clock:" in printed


def test_evolve_is_deterministic(tmp_path):
    """Test that the same seed writes byte-identical level files."""
    _, first = _evolve(tmp_path, 'a', seed='11')
    _, second = _evolve(tmp_path, 'b', seed='11')
    for sub in ('initial', 'final'):
        names = sorted(p.name for p in (first / sub).iterdir())
        assert names == sorted(p.name for p in (second / sub).iterdir())
        for name in names:
            assert (first / sub / name).read_bytes() == (second / sub / name).read_bytes()


def test_evolve_missing_parent(tmp_path, capsys):
    """Test exit 2 when the output parent does not exist."""
    assert main(['evolve', '--size', '4', '--out', str(tmp_path / 'missing' / 'run')]) == 2
    assert "error:" in capsys.readouterr().err


def test_evolve_failure_exit_code(tmp_path):
    """Test exit 1 when the GA finds nothing acceptable."""
    config_path = tmp_path / 'hard.yaml'
    config_path.write_text("max-iterations: 0\nthreshold: 5.0\n")
    assert main(['evolve', '--config', str(config_path), '--size', '4', '--out', str(tmp_path / 'run')]) == 1


def test_pipeline(tmp_path, capsys):
    """Test evolve, distill and generate end to end."""
    _, run_dir = _evolve(tmp_path)
    capsys.readouterr()
    assert main(['distill', str(run_dir), '--threshold', '0.7']) == 0
    printed = capsys.readouterr().out
    pairs = int(printed.split("pairs: ")[1].split()[0])
    policy_dir = run_dir / 'policy'
    lines = (policy_dir / 'dataset.pcg').read_text().rstrip("\n").split("\n")
    record_lines = [line for line in lines[2:] if not line.startswith("trajectory ")]
    assert len(record_lines) == pairs
    assert f"delta_total: {pairs}" in printed

    first_dataset = (policy_dir / 'dataset.pcg').read_bytes()
    assert main(['distill', str(run_dir), '--threshold', '0.7']) == 0
    assert (policy_dir / 'dataset.pcg').read_bytes() == first_dataset

    gen_dir = tmp_path / 'gen'
    assert main(['generate', str(policy_dir / 'policy.json'), '--levels', '3', '--out', str(gen_dir)]) == 0
    files = sorted(gen_dir.glob('*.lvl'))
    assert [f.name for f in files] == ['000.lvl', '001.lvl', '002.lvl']
    assert (gen_dir / 'config.yaml').is_file()
    capsys.readouterr()
    assert main(['validate', '--threshold', '0.7'] + [str(f) for f in files]) == 0


def test_distill_errors(tmp_path):
    """Test exit 2 for a missing run and exit 1 for a run without final levels."""
    assert main(['distill', str(tmp_path / 'nope')]) == 2
    config_path = tmp_path / 'hard.yaml'
    config_path.write_text("max-iterations: 0\nthreshold: 5.0\n")
    run_dir = tmp_path / 'failed'
    main(['evolve', '--config', str(config_path), '--size', '4', '--out', str(run_dir)])
    assert main(['distill', str(run_dir)]) == 1


def test_generate_corrupt_dataset(tmp_path):
    """Test exit 2 when the dataset header is damaged."""
    _, run_dir = _evolve(tmp_path)
    main(['distill', str(run_dir), '--threshold', '0.7'])
    dataset = run_dir / 'policy' / 'dataset.pcg'
    dataset.write_text(dataset.read_text().replace("PCGDATA", "GARBAGE", 1))
    assert main(['generate', str(run_dir / 'policy' / 'policy.json'), '--out', str(tmp_path / 'gen')]) == 2


def test_generate_zero_levels(tmp_path, capsys):
    """Test that count 0 succeeds without touching the policy."""
    assert main(['generate', str(tmp_path / 'absent.json'), '--levels', '0']) == 0
    assert "nothing to generate" in capsys.readouterr().out


def test_render(tmp_path, capsys):
    """Test plain rendering, the path overlay on an unsolvable maze and platformer output."""
    maze = tmp_path / 'maze.lvl'
    maze.write_text(UNSOLVABLE)
    assert main(['render', str(maze)]) == 0
    out = capsys.readouterr().out
    assert parse_level(out, MAZE_ALPHABET) == parse_level(UNSOLVABLE, MAZE_ALPHABET)

    assert main(['render', str(maze), '--path']) == 0
    out = capsys.readouterr().out
    assert out.startswith(UNSOLVABLE)
    assert "unsolvable" in out

    platformer = tmp_path / 'flat.lvl'
    platformer.write_text(FLAT)
    assert main(['render', str(platformer)]) == 0
    rows = capsys.readouterr().out.rstrip("\n").split("\n")[1:]
    assert len(rows) == 16
    assert all(len(row) == 101 for row in rows)


def test_render_parse_error(tmp_path):
    """Test exit 2 for an unparsable level."""
    bad = tmp_path / 'bad.lvl'
    bad.write_text("4 4\n..\n")
    assert main(['render', str(bad)]) == 2


def test_validate(tmp_path, capsys):
    """Test that a winning platformer passes and an unsolvable maze fails."""
    flat = tmp_path / 'flat.lvl'
    flat.write_text(FLAT)
    maze = tmp_path / 'maze.lvl'
    maze.write_text(UNSOLVABLE)
    assert main(['validate', str(flat)]) == 0
    assert "ok" in capsys.readouterr().out
    assert main(['validate', str(flat), str(maze)]) == 1
    assert "BELOW THRESHOLD" in capsys.readouterr().out


def test_unknown_config_key(tmp_path):
    """Test exit 2 for a config file with an unknown key."""
    config_path = tmp_path / 'bad.yaml'
    config_path.write_text("popsize: 10\n")
    assert main(['evolve', '--config', str(config_path), '--out', str(tmp_path / 'run')]) == 2


def test_usage_error():
    """Test that a missing subcommand is a usage error."""
    with pytest.raises(SystemExit) as raised:
        main([])
    assert raised.value.code == 2


def test_bench_degraded_exit_code(mocker, tmp_path):
    """Test that degraded cells make bench exit 1."""
    summary = BenchSummary('policy', 'maze', 10, 1.0, 5, 2, 1.0, 0.1, 0.5, 0.1, 0.4, 0.75, True)
    run_plan = mocker.patch.object(cli, 'run_plan', return_value=([], [summary]))
    mocker.patch.object(cli, 'plot_results', return_value=[])
    plan_file = tmp_path / 'plan.yaml'
    plan_file.write_text("size: 10\nlevels: 5\nseeds: [0, 1]\nfraction: 1.0\n")
    out = tmp_path / 'bench'
    assert main(['bench', str(plan_file), '--out', str(out)]) == 1
    plan = run_plan.call_args.args[0]
    assert plan.maze_sizes == (10,)
    assert plan.seeds == (0, 1)
    resolved = yaml.safe_load((out / 'config.yaml').read_text())
    assert resolved['levels'] == [5]

    run_plan.return_value = ([], [BenchSummary('ga', 'maze', 10, 1.0, 5, 2, 1.0, 0.1, 1.0, 0.0, 0.0, 0.0, False)])
    assert main(['bench', str(plan_file), '--out', str(out)]) == 0
