"""Run gevreych from a source checkout without installing it

    python scripts/run_gevreych.py verify --config example/default_config.yaml
"""
import importlib.util
import os
import sys


def _load_package():
    try:
        import gevreych  # noqa: F401
        return
    except ImportError:
        pass
    # the sources live in core/, expose them under the installed name
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    spec = importlib.util.spec_from_file_location('gevreych', os.path.join(root, 'core', '__init__.py'),
                                                  submodule_search_locations=[os.path.join(root, 'core')])
    module = importlib.util.module_from_spec(spec)
    sys.modules['gevreych'] = module
    spec.loader.exec_module(module)


if __name__ == '__main__':
    _load_package()
    from gevreych.cli import main
    sys.exit(main())
