import os
import re
import shutil
import sys

# To avoid importing the module, simply parse the file to find the version variable in it.
with open('src/commands.py', 'r', encoding='utf-8') as f:
    data = f.read()
for line in data.splitlines():
    if line.startswith('__version__'):
        version = re.search(r"'(.+)'", line).group(1)
        break
else:
    raise RuntimeError('Unable to parse product version.')

build_dirpath = 'build'
bundle_dirname = f'nestedmm-{version}'
bundle_dirpath = os.path.join(build_dirpath, bundle_dirname)

build_exe_options = {
    "packages": ["src", "networkx", "numpy"],
    "includes": [],
    "excludes": ["tkinter", "pytest", "hypothesis"],
    "optimize": 0,
    "build_exe": bundle_dirpath,
    "include_files": [("src/resources", "lib/src/resources")],
}

# Only the freeze commands go through cx_Freeze; any other command (e.g. pip's egg_info /
# editable_wheel) is a plain setuptools build of the source tree.
FREEZE_COMMANDS = {'build_exe', 'bdist_msi', 'bdist_mac', 'bdist_dmg', 'bdist_appimage', 'bdist_rpm', 'bdist_deb'}
if FREEZE_COMMANDS.intersection(sys.argv[1:]):
    from cx_Freeze import setup, Executable

    setup(name="nestedmm",
          version=version,
          description="Nested Markov models of acyclic directed mixed graphs.",
          options={"build_exe": build_exe_options},
          executables=[Executable("nestedmm.py", base=None)])

    # The bundle post-processing only applies when the frozen bundle was built (build_exe).
    if os.path.isdir(bundle_dirpath):
        os.remove(os.path.join(bundle_dirpath, 'frozen_application_license.txt'))

        # Create the ZIP archive.
        current_dirpath = os.getcwd()
        os.chdir(build_dirpath)
        try:
            print('Creating ZIP archive...')
            shutil.make_archive(bundle_dirname, 'zip', '.', bundle_dirname)
        finally:
            os.chdir(current_dirpath)
else:
    from setuptools import setup

    setup(name="nestedmm",
          version=version,
          description="Nested Markov models of acyclic directed mixed graphs.",
          py_modules=["nestedmm"],
          packages=["src"],
          package_data={"src": ["resources/**/*"]},
          install_requires=["networkx", "numpy"])
