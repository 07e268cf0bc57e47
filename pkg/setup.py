from setuptools import setup

setup(name='robustdec',
      version='0.3',
      description='Decision making with robust (multivalued) models: DEC solvers, E2D, market estimators and robust MDPs',
      url='https://github.com/JimBoonie/PythonHelpers.git',
      author='Mason McGough',
      author_email='mcgough.mason@gmail.com',
      license='MIT',
      packages=['robustdec'],
      python_requires='>=3.9',
      install_requires=['numpy', 'scipy', 'pandas', 'pydantic>=2'],
      extras_require={'test': ['pytest', 'hypothesis']},
      entry_points={'console_scripts': ['robustdec=robustdec.cli:main']},
      zip_safe=False)
