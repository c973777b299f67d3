#!/usr/bin/env python3
"""
Basic smoke script to check that the simulator is installed correctly.
Run this with: python test_basic.py
"""

import os
import sys
import django

# Setup Django
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'symrad.settings')
django.setup()


def test_imports():
    """Test that every simulator module can be imported"""
    try:
        from math_kernels.utils import ergodic_rayleigh_rate, sample_cscg_vector
        from scenario.models import ScenarioConfig, LinkGains
        from channel.utils import sample_realization
        from estimation.services import run_two_phase_estimation
        from beamforming.utils import build_beamformer_set
        from rates.utils import primary_rate_bound, secondary_rate_bound
        from montecarlo.services import run_campaign, sweep
        from cli.services import load_config, emit_csv
        print("✅ All module imports successful")
        return True
    except ImportError as e:
        print(f"❌ Module import failed: {e}")
        return False


def test_reference_config():
    """Test that the reference scenario validates and hashes"""
    try:
        from scenario.models import ScenarioConfig
        from scenario.serializers import ScenarioConfigSerializer
        serializer = ScenarioConfigSerializer(data={})
        serializer.is_valid(raise_exception=True)
        config = serializer.save()
        print(f"✅ Reference scenario valid (digest {config.digest()[:12]})")
        return config == ScenarioConfig()
    except Exception as e:
        print(f"❌ Config validation failed: {e}")
        return False


def test_small_campaign():
    """Test that a tiny campaign runs end to end"""
    try:
        from scenario.models import ScenarioConfig
        from montecarlo.services import run_campaign
        config = ScenarioConfig(num_trials=2, rho_grid=(0.0, 1.0))
        region = run_campaign(config, workers=1)
        print(f"✅ Campaign finished (secondary bound at rho=0: {region.mean_secondary_bound[0]:.4g} bpcu)")
        return True
    except Exception as e:
        print(f"❌ Campaign failed: {e}")
        return False


if __name__ == '__main__':
    print("🧪 Running Basic Checks for symrad\n")

    tests = [
        test_imports,
        test_reference_config,
        test_small_campaign,
    ]

    passed = 0
    total = len(tests)

    for test in tests:
        if test():
            passed += 1
        print()

    print(f"📊 Test Results: {passed}/{total} checks passed")

    if passed == total:
        print("🎉 All checks passed! The simulator is installed correctly.")
        sys.exit(0)
    else:
        print("⚠️  Some checks failed. Check the output above for details.")
        sys.exit(1)
