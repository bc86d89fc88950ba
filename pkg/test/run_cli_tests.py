#-------------------------------------------------------------------------------
# test/run_cli_tests.py
#
# Runs scripts/snapmix.py end to end: exit codes, lower-bound report and the
# reproducibility of generated models, snapshot batches and learner reports.
#-------------------------------------------------------------------------------
import csv
import io
import json
import logging
import os
import shutil
import sys
import tempfile

from utils import run_exe, is_in_rootdir

# Make it possible to run this file from the root dir of snapmix without
# installing snapmix; useful for CI testing, etc.
sys.path[0:0] = ['.']

# Create a global logger object
testlog = logging.getLogger('run_cli_tests')
testlog.setLevel(logging.DEBUG)
testlog.addHandler(logging.StreamHandler(sys.stdout))

SNAPMIX_PATH = 'scripts/snapmix.py'


def run_snapmix(args):
    testlog.info('..snapmix %s' % ' '.join(args))
    return run_exe(SNAPMIX_PATH, args)


def expect_rc(args, expected):
    rc, out = run_snapmix(args)
    if rc != expected:
        testlog.info('.......FAIL: exit code %s, expected %s' % (rc, expected))
        return False
    return True


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_exit_codes(tmpdir):
    missing = os.path.join(tmpdir, 'missing.json')
    model = os.path.join(tmpdir, 'exit_model.json')
    ok = expect_rc(['learn', '--model', missing], 2)
    ok = expect_rc(['learn', '--k', '0'], 3) and ok
    ok = expect_rc(['lowerbound', '--config', missing], 2) and ok
    ok = expect_rc(['sample'], 3) and ok
    ok = expect_rc(['generate', '--n', '10', '--out', model], 0) and ok
    ok = expect_rc(['learn', '--model', model, '--k', '3', '--n', '10'],
                   3) and ok
    return ok


def test_lowerbound():
    rc, out = run_snapmix(['lowerbound', '--k', '2', '--rho', '3'])
    if rc != 0:
        testlog.info('.......FAIL: exit code %s' % rc)
        return False
    rows = parse_csv(out)
    quantities = [row['quantity'] for row in rows]
    if quantities.count('moment') != 4 or 'tv_exact' not in quantities:
        testlog.info('.......FAIL: unexpected rows %s' % quantities)
        return False
    tv = dict((row['quantity'], row['first']) for row in rows)
    if abs(float(tv['tv_closed_form']) - float(tv['tv_exact'])) > 1e-7:
        testlog.info('.......FAIL: closed form %s vs exact %s' % (
            tv['tv_closed_form'], tv['tv_exact']))
        return False
    if float(tv['tv_aperture']) > 1e-9:
        testlog.info('.......FAIL: aperture 2 distinguishes the pair')
        return False
    return True


def test_generate_and_sample(tmpdir):
    outputs = []
    for _ in range(2):
        rc, out = run_snapmix(['generate', '--n', '10', '--seed', '3'])
        if rc != 0:
            testlog.info('.......FAIL: generate exit code %s' % rc)
            return False
        outputs.append(out)
    if outputs[0] != outputs[1]:
        testlog.info('.......FAIL: generate is not reproducible')
        return False
    model = json.loads(outputs[0])
    if model['n'] != 10 or model['k'] != 2:
        testlog.info('.......FAIL: generated model %r' % model)
        return False

    path = os.path.join(tmpdir, 'model.json')
    with open(path, 'w') as f:
        f.write(outputs[0])
    batches = [os.path.join(tmpdir, 'batch%d.csv' % i) for i in range(3)]
    if not expect_rc(['sample', '--model', path, '--seed', '4',
                      '--samples1', '1000', '--samples2', '1000',
                      '--samples-hi', '1000', '--batch1', batches[0],
                      '--batch2', batches[1], '--batch-hi', batches[2]], 0):
        return False
    for batch, aperture in zip(batches, (1, 2, 3)):
        with open(batch) as f:
            lines = f.read().split()
        if lines[0] != 'aperture=%d' % aperture or len(lines) != 1001:
            testlog.info('.......FAIL: bad batch file %s' % batch)
            return False
    return True


def test_learn(tmpdir):
    model = os.path.join(tmpdir, 'learn_model.json')
    if not expect_rc(['generate', '--n', '10', '--seed', '5', '--out', model],
                     0):
        return False

    rc, out = run_snapmix(['learn', '--model', model, '--n', '10',
                           '--tight-scale', '--no-timings'])
    if rc != 0:
        testlog.info('.......FAIL: oracle learn exit code %s' % rc)
        return False
    row = parse_csv(out)[0]
    if float(row['tran_dist']) > 1e-4 or row['wall_ms'] != '0':
        testlog.info('.......FAIL: oracle report %r' % row)
        return False

    reports = []
    for threads in ('1', '2'):
        rc, out = run_snapmix(['learn', '--mode', 'sampled', '--model', model,
                               '--n', '10', '--seed', '6', '--samples1',
                               '100000', '--samples2', '1000000',
                               '--samples-hi', '300000', '--tight-scale',
                               '--threads', threads, '--no-timings'])
        if rc != 0:
            testlog.info('.......FAIL: sampled learn exit code %s' % rc)
            return False
        reports.append(out)
    if reports[0] != reports[1]:
        testlog.info('.......FAIL: sampled learn depends on --threads')
        return False
    return True


def main():
    if not is_in_rootdir():
        testlog.error('Error: Please run me from the root dir of snapmix!')
        return 1

    tmpdir = tempfile.mkdtemp()
    try:
        success = True
        for name, run in (('exit codes', lambda: test_exit_codes(tmpdir)),
                          ('lowerbound', test_lowerbound),
                          ('generate and sample',
                           lambda: test_generate_and_sample(tmpdir)),
                          ('learn', lambda: test_learn(tmpdir))):
            testlog.info("Test '%s'" % name)
            success = run() and success
    finally:
        shutil.rmtree(tmpdir)

    if success:
        testlog.info('\nConclusion: SUCCESS')
        return 0
    else:
        testlog.info('\nConclusion: FAIL')
        return 1


if __name__ == '__main__':
    sys.exit(main())
