{
    'level': 'transaction',
    'select': 'input.address.tag.info.account',
    'where': {
        'input': {'address': {'tag': {'type': 'user', 'source': 'twitter'}}},
        'output': {
            'address': {
                'tag': {
                    'type': 'service',
                    'source': 'tor',
                    'info': {'provider': {'$like': 'silk road'}},
                }
            }
        },
        'time': '2014',
    },
    'group_by': 'input.address.tag.info.id',
    'having': 'sum(input.value) >= (10.0 * 10**7)',
    'clustering': {'source': 'inputs', 'method': 'original'},
}
