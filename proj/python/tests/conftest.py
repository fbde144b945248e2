import os
import sys

# Under ctest, ACP_BUILD_PYTHON points at the in-tree extension build; prefer it
# over any installed (including editable) copy of the package.
_build = os.environ.get("ACP_BUILD_PYTHON")
if _build:
    sys.meta_path[:] = [f for f in sys.meta_path if type(f).__name__ != "ScikitBuildRedirectingFinder"]
    sys.path.insert(0, _build)
