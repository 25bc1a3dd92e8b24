from setuptools import find_packages, setup

package_name = 'fiohardy'

setup(
    name=package_name,
    version='0.1.0',
    packages=find_packages(exclude=['test']),
    install_requires=['setuptools', 'numpy', 'scipy', 'casadi', 'matplotlib'],
    zip_safe=True,
    maintainer='izzy',
    maintainer_email='izzymones@gmail.com',
    description='Wave packet transforms, tent spaces and Hardy spaces for Fourier integral operators '
                'on a periodic grid',
    license='Apache-2.0',
    tests_require=['pytest'],
    entry_points={
        'console_scripts': [
            'fio-hardy = fiohardy.cli:main',
        ],
    },
)
