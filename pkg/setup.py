from setuptools import find_packages, setup

with open('README.md') as f:
    long_description = f.read()

setup(
    name='stressnet',
    use_scm_version=True,
    packages=find_packages(exclude=["docs", "examples", "tests"]),
    include_package_data=True,
    setup_requires=["pytest-runner", "setuptools_scm"],
    python_requires=">=3.8",
    install_requires=[
        "PyYAML>=5.1", "attrs>=19.3", "numpy>=1.20", "pathos~=0.2",
        "plumbum>=1.6", "rich>=6.1", "scipy>=1.5"
    ],
    description="Contact-free stress detection from thermal video via ISTI",
    long_description=long_description,
    long_description_content_type='text/markdown',
    license="MIT",
    entry_points={'console_scripts': ['stressnet=stressnet.driver:main']},
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Medical Science Apps.',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3'
    ],
    keywords="thermal-imaging isti stress cardiac"
)
