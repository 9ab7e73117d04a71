from setuptools import setup, find_packages
import os

version = '0.1.0'

here = os.path.abspath(os.path.dirname(__file__))

requires = [
    'gevent',
    'setuptools',
    'munch',
    'pyyaml',
    'numpy',
    'zope.interface'
]
test_requires = requires + [
    'pytest',
    'coverage',
    'mock'
]
plot_requires = [
    'matplotlib'
]

entry_points = {
    'console_scripts': [
        'maximin-sim = greenran.scheduler.maximin.simulator:main'
    ],
    'greenran.scheduler.maximin.scheduler_plugins': [
        'stochastic = greenran.scheduler.maximin.scheduler:StochasticScheduler',
        'pf-per-user = greenran.scheduler.maximin.baselines:PerUserCapPfScheduler',
        'pf-sum = greenran.scheduler.maximin.baselines:SumCapPfScheduler'
    ],
    'greenran.tests': [
        'scheduler.maximin = greenran.scheduler.maximin.tests.main:suite'
    ]
}


setup(name='greenran.scheduler.maximin',
      version=version,
      description="Maximin downlink scheduler for an energy-harvesting base station",
      long_description=open(os.path.join(here, "README.md")).read() + "\n",
      long_description_content_type='text/markdown',
      classifiers=[
          "License :: OSI Approved :: Apache Software License",
          "Programming Language :: Python :: 3",
          "Topic :: Scientific/Engineering",
          "Topic :: System :: Networking"
      ],
      keywords='wcdma hsdpa scheduling energy-harvesting simulation',
      license='Apache License 2.0',
      packages=find_packages(exclude=['ez_setup', 'examples', 'examples.*']),
      include_package_data=True,
      package_data={'greenran.scheduler.maximin.tests': ['test.yml']},
      zip_safe=False,
      python_requires='>=3.7',
      install_requires=requires,
      tests_require=test_requires,
      extras_require={'test': test_requires, 'plot': plot_requires},
      entry_points=entry_points,
      )
