"""
Copyright (c) 2026 pkslab contributors
ALL RIGHTS RESERVED.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
"""
from setuptools import setup, find_packages

setup(name='pkslab',
      version='0.1',
      license='Apache 2.0',
      description='Numerical laboratory for the Patlak-Keller-Segel and '
                  '2D vorticity equations with measure initial data.',
      package_dir={'': '.'},
      packages=find_packages('.', exclude=['tests']),
      install_requires=[
          "pyyaml",
          "numpy",
          "scipy",
          "scikit-learn",
          "pandas",
          "coloredlogs",
          "matplotlib",
          "seaborn",
          "pytest"
      ],
      zip_safe=False,
      entry_points={
          'console_scripts': [
              'pkslab=pkslab:main',
          ],
      },
      setup_requires=[],
      tests_require=["pytest"],
      )
